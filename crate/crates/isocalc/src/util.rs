//! Small combinatorial helpers shared across modules.

use num_bigint::BigInt;
use num_integer::binomial;

/// `C(n, k)` as a big integer; 0 when k > n.
pub fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    binomial(BigInt::from(n), BigInt::from(k))
}

/// Ceiling of `C(n, k) / n`.
pub fn binom_over_n_ceil(n: u64, k: u64) -> BigInt {
    let c = binom(n, k);
    let n = BigInt::from(n);
    (&c + &n - BigInt::from(1)) / n
}

/// All strictly increasing `k`-subsets of `0..n`, in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_counts() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(6, 3).len(), 20);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(2, 0).len(), 1);
        assert!(subsets(2, 3).is_empty());
        // lexicographic order
        let s = subsets(4, 2);
        assert_eq!(s[0], vec![0, 1]);
        assert_eq!(s[1], vec![0, 2]);
        assert_eq!(s[5], vec![2, 3]);
    }

    #[test]
    fn binom_ceil() {
        assert_eq!(binom(4, 2), BigInt::from(6));
        assert_eq!(binom_over_n_ceil(4, 2), BigInt::from(2)); // 6/4 -> 2
        assert_eq!(binom_over_n_ceil(2, 1), BigInt::from(1));
        assert_eq!(binom_over_n_ceil(6, 3), BigInt::from(4)); // 20/6 -> 4
    }
}
