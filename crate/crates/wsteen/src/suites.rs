//! Verification suites. Each returns a [`VerificationReport`] whose records
//! are in a canonical order, so reruns serialize identically up to timing.

use std::collections::BTreeMap;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use wsteen_core::eta_local::EtaLocal;
use wsteen_core::homology_engine::{d_squared_failures, exactness_accounting, homology_dim, MapId, Window};
use wsteen_core::milnor_dual::{Pure, GEN_CAP};
use wsteen_core::shadow_modules::ShadowModules;
use wsteen_core::witt_models::{relation_catalog, Family, RelationStatus, RuleSet, WittModels};
use wsteen_core::{AElement, AMonomial, Bidegree, DualSteenrod, FieldPreset, KmMono, Scalar, ScalarMono, Side, SteenrodOp};

use crate::error::CliError;
use crate::report::{CheckRecord, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Hopf,
    Action,
    DSquared,
    KernelD,
    Freeness,
    LemmaC,
    LemmaT,
    KwPresentation,
    MainTheorem,
    EtaTorsion,
    EtaInverted,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Hopf,
        Suite::Action,
        Suite::DSquared,
        Suite::KernelD,
        Suite::Freeness,
        Suite::LemmaC,
        Suite::LemmaT,
        Suite::KwPresentation,
        Suite::MainTheorem,
        Suite::EtaTorsion,
        Suite::EtaInverted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Hopf => "hopf",
            Suite::Action => "action",
            Suite::DSquared => "d-squared",
            Suite::KernelD => "kernel-d",
            Suite::Freeness => "freeness",
            Suite::LemmaC => "lemma-c",
            Suite::LemmaT => "lemma-t",
            Suite::KwPresentation => "kw-presentation",
            Suite::MainTheorem => "main-theorem",
            Suite::EtaTorsion => "eta-torsion",
            Suite::EtaInverted => "eta-inverted",
        }
    }

    /// Suites that need a Witt ring table.
    pub fn needs_witt(self) -> bool {
        matches!(
            self,
            Suite::LemmaC | Suite::LemmaT | Suite::KwPresentation | Suite::MainTheorem | Suite::EtaTorsion | Suite::EtaInverted
        )
    }

    fn default_window(self) -> Window {
        match self {
            Suite::MainTheorem => Window::EXTENDED,
            _ => Window::DEFAULT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteParams {
    pub window: Option<Window>,
    pub max_index: usize,
    pub jmax: usize,
    pub pairs: usize,
    pub seed: u64,
    pub max_weight: i32,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams { window: None, max_index: 4, jmax: 4, pairs: 200, seed: 2024, max_weight: 12 }
    }
}

pub fn run_suite(suite: Suite, preset: &FieldPreset, params: &SuiteParams) -> Result<VerificationReport, CliError> {
    let start = Instant::now();
    let window = params.window.unwrap_or(suite.default_window());
    let mut parameters: BTreeMap<String, Value> = BTreeMap::new();
    let mut put = |k: &str, v: Value| {
        parameters.insert(k.into(), v);
    };
    let mut report = match suite {
        Suite::Hopf => {
            put("max_weight", json!(params.max_weight));
            hopf(preset, params.max_weight, parameters)
        }
        Suite::Action => {
            put("pairs", json!(params.pairs));
            put("seed", json!(params.seed));
            action(preset, params.pairs, params.seed, parameters)
        }
        Suite::DSquared => {
            put("window", json!(window));
            d_squared(preset, window, parameters)?
        }
        Suite::KernelD => {
            put("window", json!(window));
            kernel_d(preset, window, parameters)?
        }
        Suite::Freeness => {
            put("window", json!(window));
            freeness(preset, window, parameters)?
        }
        Suite::LemmaC | Suite::LemmaT | Suite::KwPresentation | Suite::MainTheorem => {
            put("max_index", json!(params.max_index));
            if suite == Suite::MainTheorem {
                put("window", json!(window));
            }
            relations(suite, preset, params.max_index, window, parameters)?
        }
        Suite::EtaTorsion => {
            put("window", json!(window));
            eta_torsion(preset, window, parameters)?
        }
        Suite::EtaInverted => {
            put("jmax", json!(params.jmax));
            put("pairs", json!(params.pairs));
            put("seed", json!(params.seed));
            eta_inverted(preset, params, parameters)?
        }
    };
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Collects pass counts and the first few failure witnesses of one law.
struct Tally {
    id: String,
    checked: usize,
    failures: Vec<String>,
    failed: usize,
}

impl Tally {
    fn new(id: &str) -> Self {
        Tally { id: id.into(), checked: 0, failures: Vec::new(), failed: 0 }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < 5 {
                self.failures.push(witness());
            }
        }
    }

    fn finish(self) -> CheckRecord {
        CheckRecord::new(
            self.id,
            self.failed == 0,
            json!({"checked": self.checked, "failed": self.failed, "witnesses": self.failures}),
        )
    }
}

/// Pure monomials `τ(E)ξ(R)` of weight at most `w`.
pub fn pure_monomials_up_to(a: &DualSteenrod, w: i32) -> Vec<Pure> {
    let mut out = Vec::new();
    for q in 0..=w {
        for p in 2 * q..=2 * q + GEN_CAP as i32 + 1 {
            out.extend(a.pure_basis(Bidegree::new(p, q)).iter().copied());
        }
    }
    out
}

fn hopf(preset: &FieldPreset, max_weight: i32, parameters: BTreeMap<String, Value>) -> VerificationReport {
    let a = DualSteenrod::new(preset.clone());
    let monos = pure_monomials_up_to(&a, max_weight);
    let mut coassoc = Tally::new("coassociativity");
    let mut counit_l = Tally::new("counit-left");
    let mut counit_r = Tally::new("counit-right");
    let mut invol = Tally::new("conjugation-involution");
    let mut mult_d = Tally::new("coproduct-multiplicative");
    let mut mult_i = Tally::new("conjugation-multiplicative");
    let mut gens: Vec<(AElement, i32)> = vec![(a.tau(), 0)];
    for c in preset.km_basis(1) {
        gens.push((a.km_elt(c), 0));
    }
    for i in 0..=GEN_CAP {
        gens.push((a.tau_gen(i), Bidegree::tau_i(i).q));
        if i >= 1 {
            gens.push((a.xi_gen(i), Bidegree::xi_i(i).q));
        }
    }
    let mut basis = Vec::new();
    for p in &monos {
        for d in 0..=2 {
            for c in preset.km_basis(d) {
                for tpow in 0..=2u16 {
                    basis.push(AMonomial::new(c, tpow, *p));
                }
            }
        }
    }
    for m in &basis {
        let x = AElement::from_mono(*m);
        let name = || a.format(&x);
        let d = a.coproduct(&x);
        counit_l.record(a.counit_left(&d) == x, name);
        counit_r.record(a.counit_right(&d) == x, name);
        coassoc.record(a.coassoc_left(&x) == a.coassoc_right(&x), name);
        let ix = a.conjugate(&x);
        invol.record(a.conjugate(&ix) == x, name);
        let wx = m.bidegree().q;
        for (g, wg) in &gens {
            if wx + wg > max_weight {
                continue;
            }
            let gx = a.mul(g, &x);
            let witness = || format!("{} * {}", a.format(g), a.format(&x));
            mult_d.record(a.coproduct(&gx) == a.tensor_mul(&a.coproduct(g), &d), witness);
            mult_i.record(a.conjugate(&gx) == a.mul(&a.conjugate(g), &ix), witness);
        }
    }
    let records = vec![coassoc.finish(), counit_l.finish(), counit_r.finish(), invol.finish(), mult_d.finish(), mult_i.finish()];
    VerificationReport::new(Suite::Hopf.name(), preset.name(), parameters, records).with_summary("pure_monomials", monos.len()).with_summary("basis_monomials", basis.len())
}

/// A random basis monomial: a pure part of weight at most 5, times `τ` or a
/// field class now and then.
fn random_monomial(a: &DualSteenrod, pool: &[Pure], rng: &mut ChaCha8Rng) -> AElement {
    let p = pool[rng.next_u32() as usize % pool.len()];
    let tpow = rng.next_u32().is_multiple_of(3) as u16;
    let c = match a.rho() {
        Some(r) if rng.next_u32().is_multiple_of(4) => r,
        _ => KmMono::ONE,
    };
    a.scale_left(&ScalarMono { c, tpow }, &AElement::from_pure(p))
}

fn action(preset: &FieldPreset, pairs: usize, seed: u64, parameters: BTreeMap<String, Value>) -> VerificationReport {
    let a = DualSteenrod::new(preset.clone());
    let pool = pure_monomials_up_to(&a, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tallies = [
        Tally::new("cartan-sq1-left"),
        Tally::new("cartan-sq1-right"),
        Tally::new("cartan-sq2-left"),
        Tally::new("cartan-sq2-right"),
    ];
    for _ in 0..pairs {
        let x = random_monomial(&a, &pool, &mut rng);
        let y = random_monomial(&a, &pool, &mut rng);
        let xy = a.mul(&x, &y);
        for (k, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            let s1 = |z: &AElement| a.act(SteenrodOp::Sq1, side, z);
            let s2 = |z: &AElement| a.act(SteenrodOp::Sq2, side, z);
            let witness = || format!("x = {}, y = {}", a.format(&x), a.format(&y));
            tallies[k].record(s1(&xy) == a.mul(&s1(&x), &y).add(&a.mul(&x, &s1(&y))), witness);
            let twist = match side {
                Side::Left => a.tau(),
                Side::Right => a.eta_r_tau_pow(1),
            };
            let expect = a.mul(&s2(&x), &y).add(&a.mul(&x, &s2(&y))).add(&a.mul(&twist, &a.mul(&s1(&x), &s1(&y))));
            tallies[2 + k].record(s2(&xy) == expect, witness);
        }
    }
    let mut records: Vec<CheckRecord> = tallies.into_iter().map(Tally::finish).collect();
    let xb1 = a.xi_bar_pow(1, 1);
    let v = a.act(SteenrodOp::Sq2, Side::Right, &xb1);
    records.push(CheckRecord::new("sq2-right-of-xb1", v == AElement::one(), a.format(&v)));
    let v = a.act(SteenrodOp::Sq2, Side::Left, &a.tau_gen(1));
    records.push(CheckRecord::new("sq2-left-of-t1", v == a.tau_gen(0), a.format(&v)));
    let v = a.kronecker(Pure::tau(0), &a.conjugate(&a.tau()));
    let rho = match a.rho() {
        Some(r) => Scalar::mono(ScalarMono { c: r, tpow: 0 }),
        None => Scalar::zero(),
    };
    records.push(CheckRecord::new("sq1-pairing-with-conjugate-tau", v == rho, a.format_scalar(&v)));
    let mut inter = Tally::new("conjugation-intertwines-sq2");
    for p in pure_monomials_up_to(&a, 10) {
        let x = AElement::from_pure(p);
        let l = a.conjugate(&a.act(SteenrodOp::Sq2, Side::Right, &x));
        let r = a.act(SteenrodOp::Sq2, Side::Left, &a.conjugate(&x));
        inter.record(l == r, || a.format(&x));
    }
    records.push(inter.finish());
    VerificationReport::new(Suite::Action.name(), preset.name(), parameters, records)
}

fn shadow(preset: &FieldPreset) -> ShadowModules {
    ShadowModules::new(DualSteenrod::new(preset.clone()))
}

fn d_squared(preset: &FieldPreset, window: Window, parameters: BTreeMap<String, Value>) -> Result<VerificationReport, CliError> {
    let s = shadow(preset);
    let mut records = Vec::new();
    for (map, id) in [(MapId::DRight, "d-right-squared"), (MapId::DLeft, "d-left-squared")] {
        let mut bad = Vec::new();
        let mut count = 0;
        for b in window.bidegrees() {
            let n = d_squared_failures(&s, map, b)?;
            count += 1;
            if n > 0 {
                bad.push(json!({"bidegree": b, "nonzero_columns": n}));
            }
        }
        records.push(CheckRecord::new(id, bad.is_empty(), json!({"bidegrees": count, "failures": bad})));
    }
    Ok(VerificationReport::new(Suite::DSquared.name(), preset.name(), parameters, records))
}

fn kernel_d(preset: &FieldPreset, window: Window, parameters: BTreeMap<String, Value>) -> Result<VerificationReport, CliError> {
    let s = shadow(preset);
    let mut records = Vec::new();
    let mut refused = 0;
    let mut exact_bad = Vec::new();
    for b in window.bidegrees() {
        for map in [MapId::DRight, MapId::DLeft] {
            let r = homology_dim(&s, map, b)?;
            if map == MapId::DLeft && r.predicted_h.is_none() {
                refused += 1;
            }
            if r.dim_domain == 0 && r.dim_im == 0 {
                continue;
            }
            let id = match map {
                MapId::DRight => format!("d-right-kernel@{b}"),
                MapId::DLeft => format!("d-left-homology@{b}"),
            };
            records.push(CheckRecord::new(id, r.matches, &r));
        }
        let (here, below, total) = exactness_accounting(&s, b);
        if here + below != total {
            exact_bad.push(json!({"bidegree": b, "here": here, "below": below, "hkm": total}));
        }
    }
    records.push(CheckRecord::new("split-sequence-accounting", exact_bad.is_empty(), json!({"failures": exact_bad})));
    Ok(VerificationReport::new(Suite::KernelD.name(), preset.name(), parameters, records)
        .with_summary("predictor_refused_bidegrees", refused))
}

fn freeness(preset: &FieldPreset, window: Window, parameters: BTreeMap<String, Value>) -> Result<VerificationReport, CliError> {
    let s = shadow(preset);
    let mut records = Vec::new();
    for b in window.bidegrees() {
        let m = s.freeness_matrix(b)?;
        if m.cols() == 0 {
            continue;
        }
        let ok = m.rows() == m.cols() && m.rank() == m.cols();
        records.push(CheckRecord::new(format!("tau-change-of-basis@{b}"), ok, json!({"dim": m.cols(), "rank": m.rank()})));
    }
    Ok(VerificationReport::new(Suite::Freeness.name(), preset.name(), parameters, records))
}

fn relations(
    suite: Suite,
    preset: &FieldPreset,
    max_index: usize,
    window: Window,
    parameters: BTreeMap<String, Value>,
) -> Result<VerificationReport, CliError> {
    if !(2..=GEN_CAP).contains(&max_index) {
        return Err(CliError::Usage(format!("--max-index must lie in 2..={GEN_CAP}")));
    }
    let family = match suite {
        Suite::LemmaC => Family::CRelations,
        Suite::LemmaT => Family::TRelations,
        Suite::KwPresentation => Family::KwPresentation,
        _ => Family::MainTheorem,
    };
    let rels: Vec<_> = relation_catalog(max_index).into_iter().filter(|r| r.family == family).collect();
    let mut records = Vec::new();
    let mut statuses: BTreeMap<String, usize> = BTreeMap::new();
    let mut defects = Vec::new();
    let m = WittModels::new(preset.clone())?;
    let catalog = m.verify_catalog(&rels);
    for c in catalog {
        let status = serde_json::to_value(c.status)?.as_str().unwrap_or_default().to_string();
        *statuses.entry(status).or_default() += 1;
        if !c.homogeneous {
            defects.push(json!({"id": c.id, "params": c.params, "defect": c.defect}));
        }
        records.push(CheckRecord::new(format!("{}{}", c.id, c.params), c.status != RelationStatus::Fails, &c));
    }
    let mut report_summary = vec![("statuses", json!(statuses)), ("printed_form_defects", json!(defects))];
    if suite == Suite::MainTheorem {
        let mut printed_dependent = Vec::new();
        let mut checked = 0;
        for b in window.bidegrees() {
            let r = m.independence_check(b, RuleSet::Completed)?;
            if r.monomials.is_empty() && r.target_dim == 0 {
                continue;
            }
            checked += 1;
            let p = m.independence_check(b, RuleSet::Printed)?;
            if !p.independent {
                printed_dependent.push(json!({"bidegree": b, "dependency": p.dependency}));
            }
            records.push(CheckRecord::new(format!("independence@{b}"), r.independent && r.spans, &r));
        }
        report_summary.push(("independence_bidegrees", json!(checked)));
        report_summary.push(("printed_rule_dependencies", json!(printed_dependent.len())));
        report_summary.push(("printed_rule_first_dependencies", json!(printed_dependent.into_iter().take(5).collect::<Vec<_>>())));
    }
    let mut report = VerificationReport::new(suite.name(), preset.name(), parameters, records);
    for (k, v) in report_summary {
        report = report.with_summary(k, v);
    }
    Ok(report)
}

fn eta_torsion(preset: &FieldPreset, window: Window, parameters: BTreeMap<String, Value>) -> Result<VerificationReport, CliError> {
    let m = WittModels::new(preset.clone())?;
    let mut records = Vec::new();
    for b in window.bidegrees() {
        let r = m.eta_torsion_check(b)?;
        if r.dim_ker == 0 && r.dim_torsion == 0 {
            continue;
        }
        records.push(CheckRecord::new(format!("eta-torsion@{b}"), r.matches, &r));
    }
    Ok(VerificationReport::new(Suite::EtaTorsion.name(), preset.name(), parameters, records))
}

fn eta_inverted(preset: &FieldPreset, params: &SuiteParams, parameters: BTreeMap<String, Value>) -> Result<VerificationReport, CliError> {
    let l = EtaLocal::new(preset.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let r = l.verify_corollary(params.jmax, params.pairs, &mut rng)?;
    let mut records = vec![CheckRecord::new(
        "localize-is-a-ring-map",
        r.ring_map_failures.is_empty(),
        json!({"pairs": r.ring_map_pairs, "failures": r.ring_map_failures}),
    )];
    for c in &r.relations {
        records.push(CheckRecord::new(format!("relation {}", c.name), c.passed, c));
    }
    for c in &r.ranks {
        records.push(CheckRecord::new(format!("rank@({},0)", c.p), c.passed, c));
    }
    for c in &r.chains {
        records.push(CheckRecord::new(format!("chain {}", c.name), c.passed, c));
    }
    Ok(VerificationReport::new(Suite::EtaInverted.name(), preset.name(), parameters, records))
}
