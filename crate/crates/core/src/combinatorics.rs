//! Exact binomials and small enumeration helpers (permutations, subsets,
//! multisets, index tuples).

/// `C(n, k)` in exact integer arithmetic; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        if !next_permutation(&mut current) {
            return out;
        }
    }
}

/// Advances to the next lexicographic permutation; false once the last one is reached.
pub fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Parity of a permutation given in one-line notation: `+1` or `-1`.
pub fn permutation_sign(p: &[usize]) -> f64 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1.0;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// All `r`-element subsets of `0..n`, each ascending, in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut current: Vec<usize> = (0..r).collect();
    loop {
        out.push(current.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < n - r + i {
                current[i] += 1;
                for t in i + 1..r {
                    current[t] = current[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Nondecreasing tuples of length `n` over `0..k` (multisets), lexicographic.
pub fn multisets(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut current = vec![0usize; n];
    loop {
        out.push(current.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] + 1 < k {
                let v = current[i] + 1;
                for slot in current[i..].iter_mut() {
                    *slot = v;
                }
                break;
            }
        }
    }
}

/// All tuples in `[k]^n`, lexicographic.
pub fn tuples(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 && n > 0 {
        return out;
    }
    let mut current = vec![0usize; n];
    loop {
        out.push(current.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            current[i] += 1;
            if current[i] < k {
                break;
            }
            current[i] = 0;
        }
    }
}

/// Distinct rearrangements of a multiset, lexicographic.
pub fn distinct_arrangements(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut current = sorted.to_vec();
    current.sort_unstable();
    let mut out = Vec::new();
    loop {
        out.push(current.clone());
        if !next_permutation(&mut current) {
            return out;
        }
    }
}

/// Number of distinct rearrangements of a multiset given as a sorted tuple.
pub fn arrangement_count(sorted: &[usize]) -> u128 {
    let mut count = factorial(sorted.len());
    let mut run = 1;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            count /= factorial(run);
            run = 1;
        }
    }
    if !sorted.is_empty() {
        count /= factorial(run);
    }
    count
}

/// Number of occurrences of each symbol `0..k` in `tuple`.
pub fn occurrences(tuple: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    for &i in tuple {
        counts[i] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(30, 15), 155_117_520);
        for n in 0..20 {
            let row: u128 = (0..=n).map(|k| binomial(n, k)).sum();
            assert_eq!(row, 1u128 << n);
        }
    }

    #[test]
    fn enumerations_have_expected_sizes() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(subsets(5, 2).len(), 10);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(multisets(4, 3).len(), 20);
        assert_eq!(tuples(3, 2).len(), 9);
        assert_eq!(distinct_arrangements(&[0, 0, 1]), vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert_eq!(arrangement_count(&[0, 0, 1]), 3);
        assert_eq!(arrangement_count(&[1, 1, 1]), 1);
        let total: u128 = multisets(3, 4).iter().map(|m| arrangement_count(m)).sum();
        assert_eq!(total, 81);
    }

    #[test]
    fn signs() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1.0);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1.0);
        assert_eq!(permutation_sign(&[1, 2, 0]), 1.0);
    }
}
