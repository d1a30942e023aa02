//! Small integer helpers shared across modules.

use num_integer::Integer;

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn gcd_slice(values: &[i64]) -> i64 {
    values.iter().fold(0i64, |acc, &v| acc.gcd(&v))
}

/// Positive divisors of `n` in increasing order. `n` must be nonzero.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n > 0, "divisors of zero are unbounded");
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Prime factorization as (prime, exponent) pairs, primes increasing.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

pub fn is_prime_power(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1
}

pub fn distinct_prime_count(n: u64) -> usize {
    factorize(n).len()
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn mod_pos(a: i64, m: i64) -> i64 {
    a.mod_floor(&m)
}

/// Modular inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let g = a.extended_gcd(&m);
    if g.gcd.abs() != 1 {
        return None;
    }
    Some(mod_pos(g.x * g.gcd, m))
}

/// Nearest integer to `num / den` (ties rounded towards +infinity). `den > 0`.
pub fn round_div(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    Integer::div_floor(&(2 * num + den), &(2 * den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisors_and_factors() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert!(is_prime_power(25));
        assert!(!is_prime_power(6));
        assert!(!is_prime_power(1));
        assert_eq!(distinct_prime_count(210), 4);
    }

    #[test]
    fn rounding_and_inverses() {
        assert_eq!(round_div(7, 2), 4);
        assert_eq!(round_div(-7, 2), -3);
        assert_eq!(round_div(5, 3), 2);
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
        assert_eq!(isqrt(24), 4);
        assert_eq!(isqrt(25), 5);
    }
}
