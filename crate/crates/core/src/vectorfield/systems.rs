//! Built-in benchmark and certification systems, with the initial
//! conditions used by the comparison runs, plus the conserved quantities
//! used as independent checks.

use super::VectorField;
use crate::error::Error;
use crate::interval::{IVector, Interval};

const LORENZ: &str = "
x' = 10*(y - x)
y' = x*(28 - z) - y
z' = x*y - (8/3)*z
";

// Planar Hamiltonian with potential (x^2+y^2)/2 + x^2*y - y^3/3, written as
// a first-order system in (x, y, x', y').
const HENON_HEILES: &str = "
x'  = vx
y'  = vy
vx' = -x - 2*x*y
vy' = -y - x^2 + y^2
";

// Rotating-frame equations of the planar circular restricted three-body
// problem; mu is the mass ratio of the primaries.
const PCR3BP: &str = "
params: mu = 0.0009537
x'  = vx
y'  = vy
vx' = x + 2*vy - (1-mu)*(x+mu)/sqrt((x+mu)^2 + y^2)^3 - mu*(x-1+mu)/sqrt((x-1+mu)^2 + y^2)^3
vy' = y - 2*vx - (1-mu)*y/sqrt((x+mu)^2 + y^2)^3 - mu*y/sqrt((x-1+mu)^2 + y^2)^3
";

const ROSSLER: &str = "
params: a = 5.7, b = 0.2
x' = -y - z
y' = x + b*y
z' = b + z*(x - a)
";

/// 10-mode Galerkin truncation of a_k' = k^2(1 - nu k^2) a_k
///   - k sum_{n<k} a_n a_{k-n} + 2k sum_{n+k<=10} a_n a_{n+k}.
fn ks10_text() -> String {
    let modes = 10usize;
    let mut out = String::from("params: nu = 0.1215\n");
    for k in 1..=modes {
        let k2 = k * k;
        let mut rhs = format!("{k2}*(1 - nu*{k2})*a{k}");
        let quad: Vec<String> = (1..k).map(|n| format!("a{n}*a{}", k - n)).collect();
        if !quad.is_empty() {
            rhs.push_str(&format!(" - {k}*({})", quad.join(" + ")));
        }
        let cross: Vec<String> = (1..=modes.saturating_sub(k))
            .map(|n| format!("a{n}*a{}", n + k))
            .collect();
        if !cross.is_empty() {
            rhs.push_str(&format!(" + {}*({})", 2 * k, cross.join(" + ")));
        }
        out.push_str(&format!("a{k}' = {rhs}\n"));
    }
    out
}

pub const SYSTEM_NAMES: &[&str] = &["lorenz", "henon_heiles", "pcr3bp", "ks10", "rossler"];

/// Look up a built-in system by name.
pub fn by_name(name: &str) -> Option<VectorField> {
    let text = match name {
        "lorenz" => LORENZ.to_string(),
        "henon_heiles" => HENON_HEILES.to_string(),
        "pcr3bp" => PCR3BP.to_string(),
        "ks10" => ks10_text(),
        "rossler" => ROSSLER.to_string(),
        _ => return None,
    };
    Some(VectorField::from_text(&text).expect("built-in systems parse"))
}

fn parse_points(vals: &[&str]) -> IVector {
    IVector::from_entries(
        vals.iter()
            .map(|s| Interval::parse_outward(s).expect("built-in literal"))
            .collect(),
    )
}

/// Default initial condition for a built-in system: points close to
/// (approximately) periodic orbits, matching the comparison runs.
pub fn default_ic(name: &str) -> Option<IVector> {
    let v = match name {
        "lorenz" => parse_points(&["-2.1473681756955529387", "2.078047612582596404", "27"]),
        "henon_heiles" => parse_points(&["0.0", "0.10903", "0.5677233993382853", "0.0"]),
        "pcr3bp" => parse_points(&["0.92080349132074", "0.0", "0.0", "0.1044476727069111"]),
        "ks10" => parse_points(&[
            "0.2012106",
            "1.2899797585174486",
            "0.2012106",
            "-0.37786628185377774",
            "-0.042309451521292417",
            "0.043161614695331821",
            "0.0069402112803455653",
            "-0.0041564870501656455",
            "-0.00079448972725675504",
            "0.00033160609117820303",
        ]),
        // a generic seed on the attractor, on the section x = 0
        "rossler" => parse_points(&["0.0", "-6.0", "0.03"]),
        _ => return None,
    };
    Some(v)
}

/// Energy of the planar Hamiltonian system behind `henon_heiles`, evaluated
/// over a box in (x, y, vx, vy).
pub fn henon_heiles_energy(u: &IVector) -> Interval {
    let (x, y, vx, vy) = (u[0], u[1], u[2], u[3]);
    let kin = (vx * vx + vy * vy).scale(0.5);
    let quad = (x * x + y * y).scale(0.5);
    let cubic = x * x * y - (y * y * y).div_nat(3);
    kin + quad + cubic
}

/// Jacobi constant 2*Omega - |v|^2 of the `pcr3bp` field.
pub fn jacobi_constant(mu: &Interval, u: &IVector) -> Result<Interval, Error> {
    let (x, y, vx, vy) = (u[0], u[1], u[2], u[3]);
    let one = Interval::ONE;
    let r1 = ((x + *mu) * (x + *mu) + y * y).sqrt()?;
    let r2 = ((x - one + *mu) * (x - one + *mu) + y * y).sqrt()?;
    let two_omega = x * x + y * y
        + (one - *mu).scale(2.0).checked_div(&r1)?
        + mu.scale(2.0).checked_div(&r2)?;
    Ok(two_omega - (vx * vx + vy * vy))
}
