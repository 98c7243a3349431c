//! Small combinatorial helpers shared by the chaos and bound formulas.

/// `n!` as a float. Exact for `n <= 22`.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Number of distinct orderings of a sorted multi-index.
pub fn distinct_orderings(sorted: &[usize]) -> f64 {
    let mut denom = 1.0;
    let mut run = 1usize;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
            denom *= run as f64;
        } else {
            run = 1;
        }
    }
    factorial(sorted.len()) / denom
}

/// In-place lexicographic next permutation. Returns false after the last one.
pub fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Visits every non-decreasing multi-index of length `q` over `0..d`.
pub fn for_each_sorted_index(d: usize, q: usize, mut visit: impl FnMut(&[usize])) {
    if q == 0 {
        visit(&[]);
        return;
    }
    if d == 0 {
        return;
    }
    let mut idx = vec![0usize; q];
    loop {
        visit(&idx);
        let mut pos = q;
        while pos > 0 && idx[pos - 1] == d - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return;
        }
        idx[pos - 1] += 1;
        let v = idx[pos - 1];
        for slot in idx.iter_mut().skip(pos) {
            *slot = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(binomial(0, 0), 1.0);
    }

    #[test]
    fn orderings_count() {
        assert_eq!(distinct_orderings(&[0, 0]), 1.0);
        assert_eq!(distinct_orderings(&[0, 1]), 2.0);
        assert_eq!(distinct_orderings(&[0, 1, 2]), 6.0);
        assert_eq!(distinct_orderings(&[1, 1, 2, 2]), 6.0);
    }

    #[test]
    fn permutations_enumerate_all_distinct() {
        let mut v = vec![0, 0, 1, 2];
        let mut n = 1;
        while next_permutation(&mut v) {
            n += 1;
        }
        assert_eq!(n, 12);
    }

    #[test]
    fn sorted_indices_count() {
        let mut n = 0;
        for_each_sorted_index(3, 2, |_| n += 1);
        assert_eq!(n, 6);
        let mut m = 0;
        for_each_sorted_index(4, 0, |_| m += 1);
        assert_eq!(m, 1);
    }
}
