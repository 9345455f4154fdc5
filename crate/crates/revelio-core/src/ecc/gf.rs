//! GF(256) arithmetic over the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1
//! (0x11D), generator element 2. Log/antilog tables are built at compile time.

const PRIMITIVE_POLY: u16 = 0x11D;

pub struct GfTables {
    /// alpha^i for i in 0..510, doubled so products index without a modulo.
    pub exp: [u8; 512],
    /// log base alpha; log[0] is unused.
    pub log: [u8; 256],
}

pub static TABLES: GfTables = build_tables();

const fn build_tables() -> GfTables {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= PRIMITIVE_POLY;
        }
        i += 1;
    }
    let mut j = 255;
    while j < 512 {
        exp[j] = exp[j - 255];
        j += 1;
    }
    GfTables { exp, log }
}

#[inline]
pub const fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        0
    } else {
        TABLES.exp[TABLES.log[a as usize] as usize + TABLES.log[b as usize] as usize]
    }
}

/// Division in GF(256). `b` must be nonzero.
#[inline]
pub const fn div(a: u8, b: u8) -> u8 {
    debug_assert!(b != 0);
    if a == 0 {
        0
    } else {
        let la = TABLES.log[a as usize] as usize;
        let lb = TABLES.log[b as usize] as usize;
        TABLES.exp[la + 255 - lb]
    }
}

/// alpha^power for non-negative powers.
#[inline]
pub const fn alpha_pow(power: usize) -> u8 {
    TABLES.exp[power % 255]
}

/// alpha^(-power).
#[inline]
pub const fn alpha_pow_neg(power: usize) -> u8 {
    TABLES.exp[255 - (power % 255)]
}

/// Evaluates a polynomial with ascending coefficients (`poly[k]` is the
/// coefficient of x^k) at `x`.
#[inline]
pub fn poly_eval(poly: &[u8], x: u8) -> u8 {
    let mut acc = 0u8;
    for &c in poly.iter().rev() {
        acc = mul(acc, x) ^ c;
    }
    acc
}

/// Product of two polynomials in ascending-coefficient form.
pub fn poly_mul(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] ^= mul(ai, bj);
        }
    }
    out
}

/// Formal derivative; over characteristic 2 the even-power terms vanish.
pub fn poly_derivative(poly: &[u8]) -> Vec<u8> {
    if poly.len() <= 1 {
        return vec![0];
    }
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| if k % 2 == 1 { c } else { 0 })
        .collect()
}
