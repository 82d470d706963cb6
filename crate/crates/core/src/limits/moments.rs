use crate::gauss::gaussian_moment;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E[Z^p a1^q]` for `Z = m a1 + r a2` with independent standard normals,
/// as a polynomial in `m` and `r2 = r^2` (so it extends to negative `r2`).
pub fn joint_moment_r2(p: u32, q: u32, m: f64, r2: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..=p {
        let odd = p - j;
        if odd % 2 == 1 || (j + q) % 2 == 1 {
            continue;
        }
        acc += binomial(p, j) * m.powi(j as i32) * r2.powi((odd / 2) as i32) * gaussian_moment(j + q) * gaussian_moment(odd);
    }
    acc
}

/// `E[Z^p a1^q]` for `Z = m a1 + r a2`.
pub fn joint_moment(p: u32, q: u32, m: f64, r: f64) -> f64 {
    joint_moment_r2(p, q, m, r * r)
}
