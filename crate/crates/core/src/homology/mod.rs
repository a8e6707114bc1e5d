//! First homology classes, simple-loop word lengths, the splitting of a
//! class into two simple-representable ones and bounds on `l_A`.

mod bounds;

use alloc::format;
use alloc::vec::Vec;

pub use bounds::{annulus_upper, l_a_bounds, Bound, BoundReport, BoundSource};

use crate::geometry::SurfaceSpec;
use crate::{Error, Result};

/// Basis in which the coefficients of a class are written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Basis {
    /// Small loops `γ_1 … γ_k` around the punctures of a disk.
    Genus0 { punctures: usize },
    /// `α, β` on the torus.
    Torus,
    /// `α_1 … α_k, β` on a torus with `k` punctures.
    PuncturedTorus { punctures: usize },
    /// Concatenation of punctured-torus bases, one block per handle; each
    /// entry is the number of `α` generators of its block.
    GenusG { blocks: Vec<usize> },
}

impl Basis {
    pub fn rank(&self) -> usize {
        match self {
            Basis::Genus0 { punctures } => *punctures,
            Basis::Torus => 2,
            Basis::PuncturedTorus { punctures } => punctures + 1,
            Basis::GenusG { blocks } => blocks.iter().map(|k| k + 1).sum(),
        }
    }

    /// Standard basis of `H_1` of the surface.
    pub fn for_surface(s: &SurfaceSpec) -> Result<Self> {
        s.validate()?;
        let k = s.punctures as usize;
        Ok(match s.genus {
            0 => Basis::Genus0 { punctures: k },
            1 if k <= 1 => Basis::Torus,
            1 => Basis::PuncturedTorus { punctures: k },
            g => {
                let mut blocks = alloc::vec![1; g as usize];
                blocks[0] = k.max(1);
                Basis::GenusG { blocks }
            }
        })
    }

    fn fits(&self, s: &SurfaceSpec) -> bool {
        let genus = match self {
            Basis::Genus0 { .. } => 0,
            Basis::Torus | Basis::PuncturedTorus { .. } => 1,
            Basis::GenusG { blocks } => blocks.len() as u32,
        };
        genus == s.genus && self.rank() == s.h1_rank()
    }
}

/// Integer class in `H_1(M; Z)` written in a basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct H1Class {
    basis: Basis,
    coefficients: Vec<i64>,
}

impl H1Class {
    pub fn new(basis: Basis, coefficients: Vec<i64>) -> Result<Self> {
        if let Basis::GenusG { blocks } = &basis {
            if blocks.is_empty() || blocks.contains(&0) {
                return Err(Error::Basis(
                    "every handle block needs an α generator".into(),
                ));
            }
        }
        if let Basis::PuncturedTorus { punctures: 0 } = basis {
            return Err(Error::Basis("a punctured torus basis needs α_1".into()));
        }
        if coefficients.len() != basis.rank() {
            return Err(Error::Basis(format!(
                "{} coefficients for a basis of rank {}",
                coefficients.len(),
                basis.rank()
            )));
        }
        Ok(Self {
            basis,
            coefficients,
        })
    }

    pub fn genus0(coefficients: Vec<i64>) -> Self {
        let punctures = coefficients.len();
        Self {
            basis: Basis::Genus0 { punctures },
            coefficients,
        }
    }

    pub fn torus(n: i64, m: i64) -> Self {
        Self {
            basis: Basis::Torus,
            coefficients: alloc::vec![n, m],
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0)
    }

    /// Checks that the class lives on `surface`.
    pub fn check_surface(&self, surface: &SurfaceSpec) -> Result<()> {
        if self.basis.fits(surface) {
            Ok(())
        } else {
            Err(Error::Basis(format!(
                "{:?} does not match genus {} with {} punctures",
                self.basis, surface.genus, surface.punctures
            )))
        }
    }

    fn add(&self, other: &Self) -> Result<Self> {
        if self.basis != other.basis {
            return Err(Error::Basis("adding classes in different bases".into()));
        }
        Ok(Self {
            basis: self.basis.clone(),
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    fn check_sum(&self, parts: &(Self, Self)) -> Result<()> {
        if parts.0.add(&parts.1)? == *self {
            Ok(())
        } else {
            Err(Error::Decomposition(format!(
                "{:?} + {:?} != {:?}",
                parts.0.coefficients, parts.1.coefficients, self.coefficients
            )))
        }
    }
}

fn require_genus0(alpha: &H1Class) -> Result<()> {
    match alpha.basis {
        Basis::Genus0 { .. } => Ok(()),
        _ => Err(Error::Basis(format!(
            "expected a genus 0 class, got {:?}",
            alpha.basis
        ))),
    }
}

/// Word length with respect to simple loops in a punctured disk, whose
/// classes are the signed indicator vectors `±Σ_{j ∈ J} γ_j`.
pub fn word_length_genus0(alpha: &H1Class) -> Result<u64> {
    require_genus0(alpha)?;
    let c = &alpha.coefficients;
    let pos = c.iter().copied().max().unwrap_or(0).max(0);
    let neg = c.iter().map(|&x| -x).max().unwrap_or(0).max(0);
    Ok((pos + neg) as u64)
}

/// One simple loop per unit of word length: the sign and the enclosed
/// punctures. Positive loops come first, then negative ones.
pub fn simple_loops_genus0(alpha: &H1Class) -> Result<Vec<(i64, Vec<bool>)>> {
    require_genus0(alpha)?;
    let c = &alpha.coefficients;
    let mut out = Vec::new();
    let top = c.iter().copied().max().unwrap_or(0);
    for level in 1..=top {
        out.push((1, c.iter().map(|&x| x >= level).collect()));
    }
    let bottom = c.iter().copied().min().unwrap_or(0);
    for level in 1..=-bottom {
        out.push((-1, c.iter().map(|&x| x <= -level).collect()));
    }
    Ok(out)
}

/// Whether the class is represented by a simple loop (a nonzero signed
/// indicator vector in genus 0, a primitive vector on the torus).
pub fn is_simple(alpha: &H1Class) -> Option<bool> {
    if alpha.is_zero() {
        return Some(false);
    }
    match alpha.basis {
        Basis::Genus0 { .. } => word_length_genus0(alpha).ok().map(|l| l == 1),
        Basis::Torus => Some(gcd(alpha.coefficients[0], alpha.coefficients[1]) == 1),
        _ => None,
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `nα + mβ = ((n-1)α + β) + (α + (m-1)β)`.
pub fn decompose_torus(alpha: &H1Class) -> Result<(H1Class, H1Class)> {
    if alpha.basis != Basis::Torus {
        return Err(Error::Basis(format!(
            "expected a torus class, got {:?}",
            alpha.basis
        )));
    }
    let (n, m) = (alpha.coefficients[0], alpha.coefficients[1]);
    let parts = (H1Class::torus(n - 1, 1), H1Class::torus(1, m - 1));
    alpha.check_sum(&parts)?;
    Ok(parts)
}

fn split_block(c: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let k = c.len() - 1;
    let mut first = c.to_vec();
    first[0] -= 1;
    first[k] = 1;
    let mut second = alloc::vec![0; k + 1];
    second[0] = 1;
    // The β coefficient of the second summand is n - 1 so that the two
    // parts add up to the input.
    second[k] = c[k] - 1;
    (first, second)
}

/// `Σ m_i α_i + nβ = ((m_1-1)α_1 + m_2α_2 + … + m_kα_k + β) + (α_1 + (n-1)β)`.
pub fn decompose_punctured_torus(alpha: &H1Class) -> Result<(H1Class, H1Class)> {
    if !matches!(alpha.basis, Basis::PuncturedTorus { .. }) {
        return Err(Error::Basis(format!(
            "expected a punctured torus class, got {:?}",
            alpha.basis
        )));
    }
    let (a, b) = split_block(&alpha.coefficients);
    let parts = (
        H1Class::new(alpha.basis.clone(), a)?,
        H1Class::new(alpha.basis.clone(), b)?,
    );
    alpha.check_sum(&parts)?;
    Ok(parts)
}

/// Blockwise [`decompose_punctured_torus`] on a connected sum of handles.
pub fn decompose_genus_g(alpha: &H1Class) -> Result<(H1Class, H1Class)> {
    let Basis::GenusG { blocks } = &alpha.basis else {
        return Err(Error::Basis(format!(
            "expected a genus g class, got {:?}",
            alpha.basis
        )));
    };
    let mut first = Vec::with_capacity(alpha.coefficients.len());
    let mut second = Vec::with_capacity(alpha.coefficients.len());
    let mut at = 0;
    for &k in blocks {
        let (a, b) = split_block(&alpha.coefficients[at..at + k + 1]);
        first.extend(a);
        second.extend(b);
        at += k + 1;
    }
    let parts = (
        H1Class::new(alpha.basis.clone(), first)?,
        H1Class::new(alpha.basis.clone(), second)?,
    );
    alpha.check_sum(&parts)?;
    Ok(parts)
}
