//! Built-in example systems.

use crate::algebra::{Complex, MultiIndex, PolySystem, Polynomial, VariableGrouping};
use crate::error::{Error, Result};
use crate::sysio::{parse_system, RandomSource};

pub const CUBIC: &str = "group x;\ngroup y;\nC = y^2 - 2*x*y - x^3 + x;\n";

const OCTA_F: &str = "f = 1 + 2*x + 3*y^2 + 4*z^3 + 5*w^4;\n";
const OCTA_G: &str = "g = 1 + 2*x + 3*y + 5*z + 7*w;\n";
const OCTA_H: &str = "h = 1 + 2*x + 3*y + 5*z + 7*w + 11*x*y + 13*x*z + 17*x*w + 19*y*z + 23*y*w + 29*z*w\n    \
                      + 31*x*y*z + 37*x*y*w + 41*x*z*w + 43*y*z*w + 47*x*y*z*w;\n";
const OCTA_GROUPS: &str = "group x;\ngroup y;\ngroup z;\ngroup w;\n";

pub const HYPERBOLOID: &str = "group l[4];\ngroup a[3];\ngroup b[3];\ngroup c[3];\n\
    la1 = l1*a1 + l2*a2 - a3;\nla2 = l3*a1 + l4*a2 - 1;\n\
    lb1 = l1*b1 + l2*b2 - b3;\nlb2 = l3*b1 + l4*b2 - 1;\n\
    lc1 = l1*c1 + l2*c2 - c3;\nlc2 = l3*c1 + l4*c2 - 1;\n\
    ha = a1^2 + a2^2 - a3^2 - 1;\nhb = b1^2 + b2^2 - b3^2 - 1;\nhc = c1^2 + c2^2 - c3^2 - 1;\n";

/// `{(0,0,0)} × Z` with `Z` a bilinear hypersurface inside two planes.
pub const POINT_TIMES_SURFACE: &str = "group y1[3];\ngroup y2[3];\ngroup y3[3];\n\
    p1 = y11;\np2 = y12;\np3 = y13;\nq2 = 19*y22 + 46*y23;\nq3 = 19*y32 + 46*y33 + 34;\n\
    z = 243*y23*y31 - 243*y21*y33 - 306*y21 + 1020*y23 - 342*y31 + 1194*y33 + 68;\n";

/// A line in each factor: `Dim = {1}×{1}×{1}`.
pub const THREE_LINES: &str = "group y1[3];\ngroup y2[3];\ngroup y3[3];\n\
    a1 = 57*y11 - 199*y13;\na2 = 19*y12 + 46*y13;\nb1 = 57*y21 - 199*y23;\n\
    b2 = 19*y22 + 46*y23;\nc1 = 171*y31 - 597*y33 - 34;\nc2 = 19*y32 + 46*y33 + 34;\n";

/// Two lines meeting in a point.
pub const CROSSING_LINES: &str = "group p[2];\nf = (p1 + p2 - 1)*(p1 - p2);\n";

/// Two parallel lines.
pub const PARALLEL_LINES: &str = "group p[2];\nf = (p1 + p2 - 1)*(p1 + p2 + 1);\n";

pub fn cubic() -> PolySystem {
    parse_system(CUBIC).expect("fixture parses").system
}

pub fn octahedron_text(second: char) -> Result<String> {
    let extra = match second {
        'g' => OCTA_G,
        'h' => OCTA_H,
        'f' => "",
        _ => return Err(Error::InvalidArgument(format!("no octahedron system {second}"))),
    };
    Ok(format!("{OCTA_GROUPS}{OCTA_F}{extra}"))
}

/// `V(f, g)` in `ℂ_x × ℂ_y × ℂ_z × ℂ_w`.
pub fn octahedron_fg() -> PolySystem {
    parse_system(&octahedron_text('g').unwrap()).expect("fixture parses").system
}

/// `V(f, h)` in `ℂ_x × ℂ_y × ℂ_z × ℂ_w`.
pub fn octahedron_fh() -> PolySystem {
    parse_system(&octahedron_text('h').unwrap()).expect("fixture parses").system
}

pub fn hyperboloid() -> PolySystem {
    parse_system(HYPERBOLOID).expect("fixture parses").system
}

pub fn point_times_surface() -> PolySystem {
    parse_system(POINT_TIMES_SURFACE).expect("fixture parses").system
}

pub fn three_lines() -> PolySystem {
    parse_system(THREE_LINES).expect("fixture parses").system
}

pub fn crossing_lines() -> PolySystem {
    parse_system(CROSSING_LINES).expect("fixture parses").system
}

pub fn parallel_lines() -> PolySystem {
    parse_system(PARALLEL_LINES).expect("fixture parses").system
}

/// Determinant of a square matrix of polynomials by cofactor expansion.
fn det(m: &[Vec<Polynomial>]) -> Polynomial {
    let k = m.len();
    if k == 1 {
        return m[0][0].clone();
    }
    let nvars = m[0][0].nvars();
    let mut acc = Polynomial::zero(nvars);
    for r in 0..k {
        if m[r][0].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> = (0..k).filter(|&i| i != r).map(|i| m[i][1..].to_vec()).collect();
        let term = m[r][0].mul(&det(&minor));
        acc = if r % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Richardson data: the 12 minors `f_{i,j}` (`i ∈ {1,2}`, `j ∈ 1..6`) of
/// `(C | N_i)` with row `j` removed, where `C = (I_3 | M)^T` and `M` has the
/// variable groups as rows. `N_1, N_2` are random from `seed`.
pub struct Richardson {
    pub grouping: VariableGrouping,
    /// `minors[i][j]` is `f_{i+1, j+1}`.
    pub minors: Vec<Vec<Polynomial>>,
}

impl Richardson {
    pub fn new(seed: u64) -> Self {
        let grouping = VariableGrouping::standard(&[("y1", 3), ("y2", 3), ("y3", 3)]).expect("valid grouping");
        let n = 9;
        let one = Complex::new(1.0, 0.0);
        // C[r][c]: column c is (e_c; y_{c,1}, y_{c,2}, y_{c,3})
        let mut c = vec![vec![Polynomial::zero(n); 3]; 6];
        for col in 0..3 {
            c[col][col] = Polynomial::constant(n, one);
            for j in 0..3 {
                c[3 + j][col] = Polynomial::var(n, 3 * col + j);
            }
        }
        let mut rs = RandomSource::new(seed, 0x5249_4348);
        let mut minors = Vec::new();
        for _ in 0..2 {
            let nmat: Vec<Vec<Complex>> = (0..6).map(|_| rs.gaussian_vec(2)).collect();
            let full: Vec<Vec<Polynomial>> = (0..6)
                .map(|r| {
                    let mut row = c[r].clone();
                    row.extend(nmat[r].iter().map(|&v| Polynomial::constant(n, v)));
                    row
                })
                .collect();
            let fs = (0..6)
                .map(|skip| {
                    let sub: Vec<Vec<Polynomial>> = (0..6).filter(|&r| r != skip).map(|r| full[r].clone()).collect();
                    det(&sub)
                })
                .collect();
            minors.push(fs);
        }
        Richardson { grouping, minors }
    }

    /// All twelve minors: the Richardson variety.
    pub fn variety(&self) -> PolySystem {
        let polys = self.minors.iter().flatten().cloned().collect();
        PolySystem::new(polys, self.grouping.clone()).expect("consistent fixture")
    }

    /// The complete intersection `{f_13, f_15, f_24, f_26}`.
    pub fn four_minors(&self) -> PolySystem {
        let polys = vec![
            self.minors[0][2].clone(),
            self.minors[0][4].clone(),
            self.minors[1][3].clone(),
            self.minors[1][5].clone(),
        ];
        PolySystem::new(polys, self.grouping.clone()).expect("consistent fixture")
    }
}

/// Multidegrees of six general forms of multidegree (1,2,3) on ℙ³×ℙ³×ℙ³.
pub fn six_forms_class() -> (Vec<MultiIndex>, MultiIndex) {
    (vec![MultiIndex(vec![1, 2, 3]); 6], MultiIndex(vec![3, 3, 3]))
}

/// The fourth fiber power of the planar pentad pose system (40 variables in
/// ten groups of four).
pub fn pentad_text() -> String {
    let mut s = String::from("group u[4];\ngroup ub[4];\n");
    for k in 1..=4 {
        s.push_str(&format!("group t{k}_[4];\ngroup s{k}_[4];\n"));
    }
    for k in 1..=4 {
        let t = |i: usize| format!("t{k}_{i}");
        let b = |i: usize| format!("s{k}_{i}");
        for i in 1..=4 {
            s.push_str(&format!("c{k}{i} = {}*{} - 1;\n", t(i), b(i)));
        }
        s.push_str(&format!("p{k} = -(u1 + u2 + u4) + u1*{} + u2*{} + u4*{};\n", t(1), t(2), t(4)));
        s.push_str(&format!("q{k} = -(ub1 + ub2 + ub4) + ub1*{} + ub2*{} + ub4*{};\n", b(1), b(2), b(4)));
        s.push_str(&format!("r{k} = 1 + u1*{} + u3*{} - (u1 + u3 + 1)*{};\n", t(1), t(3), t(4)));
        s.push_str(&format!("v{k} = 1 + ub1*{} + ub3*{} - (ub1 + ub3 + 1)*{};\n", b(1), b(3), b(4)));
    }
    s
}

pub fn pentad() -> PolySystem {
    parse_system(&pentad_text()).expect("fixture parses").system
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        assert_eq!(cubic().polys[0].nterms(), 4);
        assert_eq!(octahedron_fh().polys[1].nterms(), 16);
        assert_eq!(hyperboloid().nvars(), 13);
        assert_eq!(point_times_surface().len(), 6);
        let p = pentad();
        assert_eq!((p.nvars(), p.len(), p.grouping.ngroups()), (40, 32, 10));
    }

    #[test]
    fn richardson_minors_are_trilinear() {
        let r = Richardson::new(1);
        for f in r.minors.iter().flatten() {
            assert_eq!(f.multidegree(&r.grouping), MultiIndex(vec![1, 1, 1]));
        }
        let x = vec![Complex::new(0.0, 0.0); 9];
        assert!(r.minors[0][5].evaluate(&x).norm() > 0.0);
    }
}
