//! Batch command interface: scenario files in, deterministic text or JSON
//! reports out.

mod scenario;

use std::sync::Arc;

use serde::Serialize;

use crate::cech::{self, ColumnComplex, MapComplexes, Sheaf};
use crate::deformation::{
    costability_lift, factor_through_family, first_order_class, stability_lift, ChainLift, DeformationDatum, HypothesisRank, LiftOutcome,
    ObstructionClass, Obstructor,
};
use crate::error::{Error, Result};
use crate::exact_algebra::{param_monomial_string, ParamRing};
use crate::geometry::{validate_atlas, validate_map, validate_submanifold, PoissonAtlas, ValidationReport};
use crate::multivector::Multivector;
use crate::normal_cmp::compare_normal_cohomology;

pub use scenario::{Defaults, Document, Line, Scenario, Section};

/// Every command name, in the order they are documented.
pub const COMMANDS: [&str; 12] = [
    "validate",
    "cohomology",
    "pd",
    "pd1",
    "audit-exactness",
    "first-order",
    "obstruct",
    "lift",
    "stability",
    "costability",
    "factor",
    "normal-compare",
];

/// Command-line overrides of the scenario defaults.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub window: Option<i32>,
    pub order: Option<u32>,
    pub seed: Option<u64>,
}

/// Exit status of a finished command.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

/// A command's report. The text form and the JSON form carry the same lines.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub window: i32,
    pub order: Option<u32>,
    /// `PASS`, `FAIL`, or `none` when no windowed computation was made.
    pub audit: String,
    pub status: i32,
    pub lines: Vec<String>,
}

impl Report {
    pub fn text(&self) -> String {
        let mut out = format!("COMMAND {}\nWINDOW {}\nORDER {}\n", self.command, self.window, order_text(self.order));
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&format!("AUDIT {}\nSTATUS {}\n", self.audit, self.status));
        out
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn order_text(o: Option<u32>) -> String {
    o.map(|o| o.to_string()).unwrap_or_else(|| "-".into())
}

/// Exit status for an error: 2 for a failed hypothesis, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::HypothesisFailed { .. } => EXIT_NEGATIVE,
        _ => EXIT_INPUT,
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    Scenario::parse(text)
}

struct Builder {
    lines: Vec<String>,
    audit: Option<bool>,
    status: i32,
}

impl Builder {
    fn new() -> Builder {
        Builder { lines: Vec::new(), audit: None, status: EXIT_OK }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn block(&mut self, s: &str) {
        self.lines.extend(s.lines().map(str::to_string));
    }

    fn audit(&mut self, pass: bool) {
        self.audit = Some(self.audit.unwrap_or(true) && pass);
    }

    fn report(&mut self, name: &str, rep: &ValidationReport) {
        self.line(format!("VALIDATE {name} {}", if rep.passed() { "PASS" } else { "FAIL" }));
        self.block(&rep.to_string());
        if !rep.passed() {
            self.status = self.status.max(EXIT_INPUT);
        }
    }
}

fn pick<'a, T>(scn: &Scenario, items: &'a [(String, T)], key: &str) -> Result<&'a T> {
    match scn.defaults.picks.get(key) {
        Some(name) => items.iter().find(|(n, _)| n == name).map(|(_, t)| t).ok_or_else(|| Error::UnresolvedReference(name.clone())),
        None => items.first().map(|(_, t)| t).ok_or_else(|| Error::UnresolvedReference(key.to_string())),
    }
}

fn pick_named<'a, T>(scn: &Scenario, items: &'a [(String, T)], key: &str) -> Result<&'a T> {
    let name = scn.defaults.picks.get(key).ok_or_else(|| Error::UnresolvedReference(key.to_string()))?;
    items.iter().find(|(n, _)| n == name).map(|(_, t)| t).ok_or_else(|| Error::UnresolvedReference(name.clone()))
}

/// Run one command on a parsed scenario.
pub fn run_command(cmd: &str, scn: &Scenario, opts: &Options) -> Result<Report> {
    let window = opts.window.unwrap_or(scn.defaults.window);
    let order = opts.order.or(scn.defaults.order);
    let mut b = Builder::new();
    match cmd {
        "validate" => validate(scn, &mut b),
        "cohomology" => cohomology(scn, window, &mut b)?,
        "pd" | "pd1" => {
            let mc = MapComplexes::new(pick(scn, &scn.maps, "map")?.clone())?;
            let (label, space) = if cmd == "pd" { ("PD", mc.pd_space(window)?) } else { ("PD1", mc.pd1_space(window)?) };
            let r = space.report(label, 0);
            b.line(format!(
                "{label} dim={} window={} audit[D={}] dim={} {}",
                r.dim,
                r.window,
                r.audit.window,
                r.audit.dim,
                if r.audit.pass { "PASS" } else { "FAIL" }
            ));
            for (i, v) in r.basis.iter().enumerate() {
                b.line(format!("  basis[{i}]"));
                for l in v {
                    b.line(format!("    {l}"));
                }
            }
            b.audit(r.audit.pass);
        }
        "audit-exactness" => {
            let mc = MapComplexes::new(pick(scn, &scn.maps, "map")?.clone())?;
            let rep = mc.exactness_audit(window)?;
            b.block(&rep.render());
            b.audit(true);
            if !rep.passed() {
                b.status = EXIT_INPUT;
            }
        }
        "first-order" => {
            let d = pick(scn, &scn.deformations, "deformation")?;
            let c = first_order_class(d, window)?;
            b.line(format!("FIRST-ORDER {} mode={} dim={} window={}", d.name, c.mode.name(), c.dim, c.window));
            b.line(format!("coords [{}]", join(&c.coords)));
            b.line(format!("class {}", if c.is_zero() { "zero" } else { "nonzero" }));
            for l in &c.element {
                b.line(format!("  {l}"));
            }
            b.line(format!("audit[D={}] dim={} {}", c.audit.window, c.audit.dim, verdict(c.audit.pass)));
            b.audit(c.audit.pass);
        }
        "obstruct" => {
            let d = pick(scn, &scn.deformations, "deformation")?;
            let total = order.unwrap_or(d.ring.mu() + 1);
            let d = d.over(&Arc::new(ParamRing::new(d.ring.names().to_vec(), total.saturating_sub(1), d.ring.ideal().to_vec())?))?;
            let e = extensions(&d, total)?.into_iter().next().ok_or_else(|| Error::ExtensionMismatch("no small extension to take".into()))?;
            let ob = Obstructor::for_datum(&d)?;
            let class = ob.obstruction(&d, &e, opts.seed, window)?;
            obstruction_lines(&mut b, &d, &class);
            if !class.is_zero() {
                b.status = EXIT_NEGATIVE;
            }
        }
        "lift" => lift(scn, window, order, &mut b)?,
        "stability" | "costability" => {
            let d = with_order(pick(scn, &scn.deformations, "deformation")?, order)?;
            let out = if cmd == "stability" {
                stability_lift(&d.base, &d, window, scn.defaults.hypothesis_check)?
            } else {
                costability_lift(&d.base, &d, window, scn.defaults.hypothesis_check)?
            };
            chain_lines(&mut b, cmd, &d, &out);
        }
        "factor" => {
            let upsilon = with_order(pick_named(scn, &scn.deformations, "composite")?, order)?;
            let phi = with_order(pick_named(scn, &scn.deformations, "first")?, order)?;
            let g = pick_named(scn, &scn.maps, "second")?;
            let out = factor_through_family(&upsilon, &phi, g, window, scn.defaults.hypothesis_check)?;
            b.line(format!("FACTOR {} through {} over {}", upsilon.name, phi.name, upsilon.ring.describe()));
            hypothesis_lines(&mut b, &out.hypotheses);
            for (k, s) in out.steps.iter().enumerate() {
                b.line(format!("STEP {} ring={}", k + 1, s.ring.describe()));
            }
            b.line(format!("RESULT {}", g.name));
            datum_lines(&mut b, &out.datum);
            b.report("factor", &out.report);
        }
        "normal-compare" => {
            let sub = pick(scn, &scn.submanifolds, "submanifold")?;
            let c = compare_normal_cohomology(sub.clone(), window)?;
            b.block(&c.render());
            b.audit(c.spaces.iter().all(|s| s.audit_pass));
            if !(c.phi0_isomorphism && c.phi1_injective) {
                b.status = EXIT_NEGATIVE;
            }
        }
        _ => return Err(Error::Unsupported(format!("unknown command `{cmd}`; expected one of {}", COMMANDS.join(", ")))),
    }
    Ok(Report {
        command: cmd.to_string(),
        window,
        order,
        audit: match b.audit {
            None => "none".into(),
            Some(p) => verdict(p).into(),
        },
        status: b.status,
        lines: b.lines,
    })
}

fn verdict(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn validate(scn: &Scenario, b: &mut Builder) {
    for (name, a) in &scn.atlases {
        if !scn.submanifolds.iter().any(|(n, _)| n == name) {
            b.report(&format!("atlas {name}"), &validate_atlas(a));
        }
    }
    for (name, s) in &scn.submanifolds {
        b.report(&format!("submanifold {name}"), &validate_submanifold(s).0);
    }
    for (name, m) in &scn.maps {
        b.report(&format!("map {name}"), &validate_map(m));
    }
    for (name, d) in &scn.deformations {
        b.report(&format!("deformation {name}"), &crate::deformation::validate_deformation(d));
    }
}

fn cohomology(scn: &Scenario, window: i32, b: &mut Builder) -> Result<()> {
    let atlas: &Arc<PoissonAtlas> = pick(scn, &scn.atlases, "atlas")?;
    b.line(format!("ATLAS {} charts={} dim={}", atlas.name, atlas.len(), atlas.dim()));
    for p in 1..=atlas.dim().max(1) {
        let c = ColumnComplex::single(Sheaf::Tangent(atlas.clone()), p);
        for q in 0..atlas.len() as i64 {
            let r = cech::hypercohomology(&c, q, window)?.report(&format!("H(wedge^{p} T)"), q);
            b.audit(r.audit.pass);
            b.block(&r.render());
        }
    }
    for r in cech::hypercohomology_report(&ColumnComplex::tangent(atlas.clone()), "HH(T)", 0..=2, window)? {
        b.audit(r.audit.pass);
        b.block(&r.render());
    }
    Ok(())
}

/// The small extensions from the datum's ring up to parameter order `total`.
pub fn extensions(d: &DeformationDatum, total: u32) -> Result<Vec<crate::exact_algebra::SmallExtension>> {
    let big = ParamRing::new(d.ring.names().to_vec(), total, d.ring.ideal().to_vec())?;
    let chain = big.extension_chain()?;
    if big == *d.ring {
        return Ok(Vec::new());
    }
    let start = chain
        .iter()
        .position(|e| *e.quotient == *d.ring)
        .ok_or_else(|| Error::ExtensionMismatch(format!("{} is not a quotient of {}", d.ring.describe(), big.describe())))?;
    Ok(chain[start..].to_vec())
}

fn with_order(d: &DeformationDatum, order: Option<u32>) -> Result<DeformationDatum> {
    match order {
        Some(mu) if mu != d.ring.mu() => d.over(&Arc::new(ParamRing::new(d.ring.names().to_vec(), mu, d.ring.ideal().to_vec())?)),
        _ => Ok(d.clone()),
    }
}

fn lift(scn: &Scenario, window: i32, order: Option<u32>, b: &mut Builder) -> Result<()> {
    let d = pick(scn, &scn.deformations, "deformation")?;
    let total = order.unwrap_or(d.ring.mu() + 1);
    let ob = Obstructor::for_datum(d)?;
    let mut cur = d.clone();
    b.line(format!("LIFT {} from {}", d.name, d.ring.describe()));
    for e in extensions(d, total)? {
        match ob.lift_step(&cur, &e, window)? {
            LiftOutcome::Obstructed(class) => {
                obstruction_lines(b, &cur, &class);
                b.line("NO CERTIFICATE");
                b.status = EXIT_NEGATIVE;
                return Ok(());
            }
            LiftOutcome::Lifted(cert) => {
                b.line(format!(
                    "STEP kernel={} ring={} residuals {}",
                    param_monomial_string(e.total.names(), &e.kernel),
                    e.total.describe(),
                    verdict(cert.report.passed())
                ));
                b.audit(ob.h1(window.max(1))?.audit.pass);
                cur = cert.datum;
            }
        }
    }
    b.line(format!("CERTIFICATE over {}", cur.ring.describe()));
    datum_lines(b, &cur);
    b.report("certificate", &crate::deformation::validate_deformation(&cur));
    Ok(())
}

fn obstruction_lines(b: &mut Builder, d: &DeformationDatum, c: &ObstructionClass) {
    b.line(format!(
        "OBSTRUCTION {} mode={} kernel={} dim={} window={}",
        d.name,
        c.mode.name(),
        param_monomial_string(d.ring.names(), &c.kernel),
        c.dim,
        c.window
    ));
    b.line(format!("coords [{}]", join(&c.coords)));
    b.line(format!("class {}", if c.is_zero() { "zero" } else { "nonzero" }));
    for l in &c.raw {
        b.line(format!("  {l}"));
    }
    b.line(format!("audit[D={}] dim={} {}", c.audit.window, c.audit.dim, verdict(c.audit.pass)));
    b.audit(c.audit.pass);
}

fn hypothesis_lines(b: &mut Builder, hyp: &[HypothesisRank]) {
    for h in hyp {
        b.line(h.render());
        b.audit(h.audit_pass);
    }
}

fn chain_lines(b: &mut Builder, cmd: &str, d: &DeformationDatum, out: &ChainLift) {
    b.line(format!("{} {} over {}", cmd.to_uppercase(), d.name, d.ring.describe()));
    hypothesis_lines(b, &out.hypotheses);
    for (k, s) in out.steps.iter().enumerate() {
        b.line(format!("STEP {} ring={}", k + 1, s.ring.describe()));
    }
    b.line("CERTIFICATE");
    datum_lines(b, &out.datum);
    b.report("certificate", &out.report);
}

/// A multivector in the scenario grammar.
pub fn multivector_text(m: &Multivector) -> String {
    let entries: Vec<String> = m
        .coeffs()
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| format!("d[{}] : {c}", k.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    if entries.is_empty() {
        "0".into()
    } else {
        entries.join("; ")
    }
}

fn atlas_lines(b: &mut Builder, side: &str, a: &PoissonAtlas) {
    for (i, j, comps) in a.transition_list() {
        if i < j {
            b.line(format!("{side}.transition {} {} = {}", a.charts[i].id, a.charts[j].id, join(&comps)));
        }
    }
    for (c, m) in a.charts.iter().zip(&a.bivectors) {
        b.line(format!("{side}.bivector {} = {}", c.id, multivector_text(m)));
    }
}

/// The datum in the scenario grammar of a deformation section.
fn datum_lines(b: &mut Builder, d: &DeformationDatum) {
    b.line(format!("mode = {}", d.mode.name()));
    for (i, comps) in d.map.components.iter().enumerate() {
        b.line(format!("component {} = {}", d.source().charts[i].id, join(comps)));
    }
    if d.mode.source_varies() {
        atlas_lines(b, "source", d.source());
    }
    if d.mode.target_varies() {
        atlas_lines(b, "target", d.target());
    }
}
