//! Degreewise matrices of the derivations, their kernels, images and homology,
//! and closed-form predictions to compare against.
//!
//! The predictions never call the matrix code: they enumerate monomials in the
//! claimed generators and only share the monomial order with the computation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_data::KmMono;
use crate::linalg::{BitVec, F2Matrix, Reducer};
use crate::milnor_dual::{AElement, Bidegree, GEN_CAP};
use crate::shadow_modules::{IndexSet, KMHWElement, ShadowModules};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapId {
    DLeft,
    DRight,
}

/// A rectangle of bidegrees, iterated by weight then degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub p_min: i32,
    pub p_max: i32,
    pub q_min: i32,
    pub q_max: i32,
}

impl Window {
    pub const DEFAULT: Window = Window { p_min: -24, p_max: 24, q_min: -16, q_max: 2 };
    /// Reaches weight 12 and the `τ₃` range.
    pub const EXTENDED: Window = Window { p_min: -32, p_max: 32, q_min: -16, q_max: 12 };

    pub fn bidegrees(&self) -> impl Iterator<Item = Bidegree> + '_ {
        (self.q_min..=self.q_max).flat_map(move |q| (self.p_min..=self.p_max).map(move |p| Bidegree::new(p, q)))
    }

    pub fn contains(&self, b: Bidegree) -> bool {
        (self.p_min..=self.p_max).contains(&b.p) && (self.q_min..=self.q_max).contains(&b.q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyReport {
    pub map: MapId,
    pub bidegree: Bidegree,
    pub dim_domain: usize,
    pub dim_ker: usize,
    /// Rank of the map arriving at this bidegree.
    pub dim_im: usize,
    pub dim_h: usize,
    pub predicted_ker: Option<usize>,
    pub predicted_h: Option<usize>,
    pub matches: bool,
    /// Representatives of a homology basis.
    pub witnesses: Vec<String>,
}

pub fn matrix_of(s: &ShadowModules, map: MapId, b: Bidegree) -> Result<F2Matrix> {
    match map {
        MapId::DLeft => s.d_left_matrix(b),
        MapId::DRight => Ok(s.d_right_matrix(b)),
    }
}

fn format_vec(s: &ShadowModules, map: MapId, b: Bidegree, v: &BitVec) -> String {
    match map {
        MapId::DLeft => {
            let sp = s.kmhw_space(b);
            let terms = v.ones().map(|i| sp.monomials[i]).collect();
            s.format_kmhw(&KMHWElement { deg: b, terms })
        }
        MapId::DRight => {
            let basis = s.hkm_basis(b);
            let x: AElement = v.ones().map(|i| basis[i]).collect();
            s.alg().format(&x)
        }
    }
}

/// Kernel, incoming image and homology at `b`, with the predictions.
pub fn homology_dim(s: &ShadowModules, map: MapId, b: Bidegree) -> Result<HomologyReport> {
    let out = matrix_of(s, map, b)?;
    let incoming = matrix_of(s, map, b + Bidegree::d_shift())?;
    let an = out.analyze();
    let inc = incoming.analyze();
    let dim_ker = an.kernel.len();
    let dim_im = inc.rank;
    let mut r = Reducer::new(out.cols());
    for v in &inc.image {
        r.insert(v);
    }
    let mut witnesses = Vec::new();
    for k in &an.kernel {
        if r.insert(k).is_some() {
            witnesses.push(format_vec(s, map, b, k));
        }
    }
    let dim_h = dim_ker - dim_im;
    let (predicted_ker, predicted_h) = match map {
        MapId::DRight => (Some(s.hkw_presentation_basis(b).len()), Some(0)),
        MapId::DLeft => match predicted_homology(s, b) {
            Ok(h) => (None, Some(h)),
            Err(Error::PredictorRefused(_)) => (None, None),
            Err(e) => return Err(e),
        },
    };
    let matches = predicted_ker.is_none_or(|k| k == dim_ker) && predicted_h.is_none_or(|h| h == dim_h);
    Ok(HomologyReport {
        map,
        bidegree: b,
        dim_domain: out.cols(),
        dim_ker,
        dim_im,
        dim_h,
        predicted_ker,
        predicted_h,
        matches,
        witnesses,
    })
}

fn require_rho_cube_zero(s: &ShadowModules) -> Result<()> {
    let order = s.alg().preset().rho_order();
    if order > 3 {
        Err(Error::PredictorRefused(format!("ρ³ ≠ 0 in preset {}", s.alg().preset().name())))
    } else {
        Ok(())
    }
}

/// `dim H(d_left)` at `b` from the basis `k^M × {1, b} × ∏_{j∈J} τ_j` of
/// `k^M[τ₂, b, τ₃, …]/(b², τ_j² − ρτ_{j+1})`.
pub fn predicted_homology(s: &ShadowModules, b: Bidegree) -> Result<usize> {
    require_rho_cube_zero(s)?;
    let mut count = 0;
    let bdeg = b_bidegree();
    let excess = b.p - 2 * b.q;
    for d in 0..=excess.max(0) as u32 {
        let n = s.alg().preset().km_basis(d).len();
        if n == 0 {
            continue;
        }
        for with_b in [false, true] {
            for j_set in 0u32..(1 << (GEN_CAP - 1)) {
                let mut deg = Bidegree::km(d);
                if with_b {
                    deg = deg + bdeg;
                }
                for j in 2..=GEN_CAP {
                    if j_set >> (j - 2) & 1 == 1 {
                        deg = deg + Bidegree::tau_i(j);
                    }
                }
                if deg == b {
                    count += n;
                }
            }
        }
    }
    Ok(count)
}

/// `b = τ₀³τ₁`.
pub fn b_bidegree() -> Bidegree {
    Bidegree::tau_i(0).scale(3) + Bidegree::tau_i(1)
}

/// Generators of `ker d_left` over `k^M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KernelGenerator {
    B,
    Tau(usize),
    C(IndexSet),
    C1(IndexSet),
}

impl KernelGenerator {
    pub fn bidegree(&self) -> Bidegree {
        match self {
            KernelGenerator::B => b_bidegree(),
            KernelGenerator::Tau(j) => Bidegree::tau_i(*j),
            KernelGenerator::C(i) => c_bidegree(i),
            KernelGenerator::C1(i) => c1_bidegree(i),
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self, KernelGenerator::C(_) | KernelGenerator::C1(_))
    }

    pub fn element(&self, s: &ShadowModules) -> Result<AElement> {
        let a = s.alg();
        Ok(match self {
            KernelGenerator::B => a.mul(&a.pow(&a.tau_gen(0), 3), &a.tau_gen(1)),
            KernelGenerator::Tau(j) => a.tau_gen(*j),
            KernelGenerator::C(i) => c_elt(s, i)?,
            KernelGenerator::C1(i) => c1_elt(s, i)?,
        })
    }

    pub fn name(&self) -> String {
        match self {
            KernelGenerator::B => "b".into(),
            KernelGenerator::Tau(j) => format!("t{j}"),
            KernelGenerator::C(i) => format!("c{i}"),
            KernelGenerator::C1(i) => format!("c1{i}"),
        }
    }
}

/// `|c(I)| = |ξ̄(I)| − (2,1)`; `c(∅) = 0` has no meaningful degree and is excluded.
pub fn c_bidegree(i: &IndexSet) -> Bidegree {
    i.xi_bidegree() - Bidegree::d_shift()
}

/// `|c₁(I)| = |τ₁ ξ̄(I)| − (2,1)`.
pub fn c1_bidegree(i: &IndexSet) -> Bidegree {
    Bidegree::tau_i(1) + i.xi_bidegree() - Bidegree::d_shift()
}

/// `ξ̄(I)` in `A`.
pub fn xi_bar_set(s: &ShadowModules, i: &IndexSet) -> Result<AElement> {
    Ok((*s.alg().conjugate_pure(i.xi_pure()?)).clone())
}

/// `c(I) = Σ_{i∈I} ξ̄_{i−1}² ξ̄(I∖i)` in `A` (the empty sum for `I = ∅`).
pub fn c_elt(s: &ShadowModules, i: &IndexSet) -> Result<AElement> {
    let a = s.alg();
    let mut out = AElement::zero();
    for k in i.iter() {
        let sq = a.xi_bar_pow(k - 1, 2);
        out.add_assign(&a.mul(&sq, &xi_bar_set(s, &i.without(k))?));
    }
    Ok(out)
}

/// `c(e_k) = ξ̄_{k−1}²` for any `k ≥ 1` (`c(e_1) = 1`).
pub fn c_single(s: &ShadowModules, k: usize) -> AElement {
    if k == 1 {
        AElement::one()
    } else {
        (*s.alg().xi_bar_pow(k - 1, 2)).clone()
    }
}

/// `c₁(I) = τ₀ ξ̄(I) + τ₁ c(I)`.
pub fn c1_elt(s: &ShadowModules, i: &IndexSet) -> Result<AElement> {
    let a = s.alg();
    Ok(a.mul(&a.tau_gen(0), &xi_bar_set(s, i)?).add(&a.mul(&a.tau_gen(1), &c_elt(s, i)?)))
}

/// All kernel generators with `p ≤ p_max`.
pub fn kernel_generators(p_max: i32) -> Vec<KernelGenerator> {
    let mut out = Vec::new();
    out.push(KernelGenerator::B);
    for j in 2..=GEN_CAP {
        out.push(KernelGenerator::Tau(j));
    }
    for i in IndexSet::all_up_to(GEN_CAP) {
        if !i.is_empty() {
            out.push(KernelGenerator::C(i));
        }
        out.push(KernelGenerator::C1(i));
    }
    out.retain(|g| g.bidegree().p <= p_max);
    out.sort_by_key(|g| (g.bidegree(), *g));
    out
}

/// A monomial in the kernel generators with a `k^M` coefficient.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GeneratorMonomial {
    pub coeff: KmMono,
    pub factors: Vec<KernelGenerator>,
}

impl GeneratorMonomial {
    pub fn has_boundary_factor(&self) -> bool {
        self.factors.iter().any(|f| f.is_boundary())
    }
}

/// Monomials in the kernel generators of bidegree `b`, evaluated in `KMHW_b`.
pub fn predictor_kernel_generators(s: &ShadowModules, b: Bidegree) -> Result<Vec<(GeneratorMonomial, KMHWElement)>> {
    require_rho_cube_zero(s)?;
    let gens = kernel_generators(b.p - 2 * b.q.min(0) + 2 * b.p.abs());
    let mut out = Vec::new();
    let excess = b.p - 2 * b.q;
    for d in 0..=excess.max(0) as u32 {
        for c in s.alg().preset().km_basis(d) {
            let start = b + Bidegree::new(d as i32, d as i32);
            let unit = s.to_kmhw_at(Bidegree::km(d), &s.alg().km_elt(c))?;
            let mut stack = Vec::new();
            search(s, &gens, 0, start, unit, &mut stack, c, &mut out)?;
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn search(
    s: &ShadowModules,
    gens: &[KernelGenerator],
    from: usize,
    remaining: Bidegree,
    acc: KMHWElement,
    stack: &mut Vec<KernelGenerator>,
    coeff: KmMono,
    out: &mut Vec<(GeneratorMonomial, KMHWElement)>,
) -> Result<()> {
    if remaining == Bidegree::ZERO {
        out.push((GeneratorMonomial { coeff, factors: stack.clone() }, acc.clone()));
    }
    for (k, g) in gens.iter().enumerate().skip(from) {
        let gb = g.bidegree();
        let rest = remaining - gb;
        // Every generator has p > 0, q ≥ 0 and p ≥ 2q.
        if rest != Bidegree::ZERO && (rest.p <= 0 || rest.q < 0 || rest.p - 2 * rest.q < 0) {
            continue;
        }
        let ge = s.to_kmhw(&g.element(s)?)?;
        let next = s.kmhw_mul(&acc, &ge)?;
        if next.is_zero() {
            // Further factors keep the product zero.
            continue;
        }
        stack.push(*g);
        search(s, gens, k, rest, next, stack, coeff, out)?;
        stack.pop();
    }
    Ok(())
}

/// Rank comparisons of the generator spans against the computed kernel and image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanComparison {
    pub bidegree: Bidegree,
    pub dim_ker: usize,
    pub span_rank: usize,
    pub span_in_kernel: bool,
    pub dim_im: usize,
    pub boundary_span_rank: usize,
    pub boundary_span_in_image: bool,
    pub matches: bool,
}

pub fn compare_kernel_span(s: &ShadowModules, b: Bidegree) -> Result<SpanComparison> {
    let monos = predictor_kernel_generators(s, b)?;
    let out = matrix_of(s, MapId::DLeft, b)?;
    let inc = matrix_of(s, MapId::DLeft, b + Bidegree::d_shift())?.analyze();
    let an = out.analyze();
    let n = out.cols();
    let mut ker = Reducer::new(n);
    for k in &an.kernel {
        ker.insert(k);
    }
    let mut im = Reducer::new(n);
    for v in &inc.image {
        im.insert(v);
    }
    let mut span = Reducer::new(n);
    let mut bspan = Reducer::new(n);
    let mut span_in_kernel = true;
    let mut boundary_span_in_image = true;
    for (m, x) in &monos {
        let v = s.kmhw_coords(x);
        span_in_kernel &= ker.contains(&v);
        span.insert(&v);
        if m.has_boundary_factor() {
            boundary_span_in_image &= im.contains(&v);
            bspan.insert(&v);
        }
    }
    let matches = span_in_kernel && boundary_span_in_image && span.rank() == an.kernel.len() && bspan.rank() == inc.rank;
    Ok(SpanComparison {
        bidegree: b,
        dim_ker: an.kernel.len(),
        span_rank: span.rank(),
        span_in_kernel,
        dim_im: inc.rank,
        boundary_span_rank: bspan.rank(),
        boundary_span_in_image,
        matches,
    })
}

/// `d ∘ d = 0` on the full basis at `b`; returns the number of nonzero columns.
pub fn d_squared_failures(s: &ShadowModules, map: MapId, b: Bidegree) -> Result<usize> {
    let first = matrix_of(s, map, b)?;
    let second = matrix_of(s, map, b - Bidegree::d_shift())?;
    let comp = second.compose(&first);
    Ok((0..comp.cols()).filter(|&j| !comp.column(j).is_zero()).count())
}

/// `dim HKW(b) + dim HKW(b − (2,1)) = dim HKM(b)`.
pub fn exactness_accounting(s: &ShadowModules, b: Bidegree) -> (usize, usize, usize) {
    let here = s.hkw_presentation_basis(b).len();
    let below = s.hkw_presentation_basis(b - Bidegree::d_shift()).len();
    (here, below, s.hkm_space(b).dim())
}

/// The `K`-part monomials `τ(E)ξ̄(R)`, `R₁` even, in `HKM_b`: independent and killed by `d_right`.
pub fn presentation_in_kernel(s: &ShadowModules, b: Bidegree) -> Result<bool> {
    let d = matrix_of(s, MapId::DRight, b)?;
    let mut span = Reducer::new(d.cols());
    for (c, p) in s.hkw_presentation_basis(b) {
        let x = s.to_hkm_at(b, &s.k_monomial(c, p))?;
        let v = s.hkm_coords(&x);
        if !d.apply(&v).is_zero() || span.insert(&v).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}
