use crate::spectral::DispersionSymbol;

/// `-φ(n) + φ(n1) + φ(n2)`; callers ensure `n = n1 + n2`.
pub fn resonance_quadratic(symbol: &DispersionSymbol, n: i64, n1: i64, n2: i64) -> f64 {
    -symbol.value(n) + symbol.value(n1) + symbol.value(n2)
}

/// `n² - n1² + n2² - n3²`; under `n = n1 - n2 + n3` this is
/// `2 (n - n1)(n - n3)`.
pub fn resonance_cubic_nls(n: i64, n1: i64, n2: i64, n3: i64) -> i64 {
    n * n - n1 * n1 + n2 * n2 - n3 * n3
}
