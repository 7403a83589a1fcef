//! Scenario files: line-oriented sections of `key = value` lines.
//!
//! ```text
//! # comment
//! [defaults]
//! window = 2
//!
//! [atlas plane]
//! chart A = x, y
//! bivector A = d[1,2] : x
//!
//! [map incl]
//! source = pt
//! target = plane
//! image P A = 0, 0
//! ```
//!
//! The document keeps every comment and entry in order, so serializing a
//! parsed canonical file reproduces it byte for byte. Objects are built in
//! file order; a section may only reference objects declared above it.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complexes::compose;
use crate::deformation::{normalize_inverses, DeformationDatum, Mode};
use crate::error::{Error, Result};
use crate::exact_algebra::{parse_poly, ParamRing, Poly, VarContext};
use crate::geometry::{Chart, PoissonAtlas, PoissonMapData, SubmanifoldData};
use crate::multivector::{parse_multivector, Multivector};

/// One line of a section body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Line {
    Comment(String),
    Entry { key: String, value: String, line: usize, column: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub kind: String,
    pub name: Option<String>,
    pub line: usize,
    pub lines: Vec<Line>,
}

/// The parsed text of a scenario, before any object is built.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub preamble: Vec<String>,
    pub sections: Vec<Section>,
}

const KINDS: [&str; 6] = ["defaults", "ring", "atlas", "map", "submanifold", "deformation"];

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::SyntaxError { line, column, message: message.into() }
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl Document {
    pub fn parse(text: &str) -> Result<Document> {
        let mut doc = Document::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = raw.len() - raw.trim_start().len();
            if let Some(c) = trimmed.strip_prefix('#') {
                let c = c.trim().to_string();
                match doc.sections.last_mut() {
                    Some(s) => s.lines.push(Line::Comment(c)),
                    None => doc.preamble.push(c),
                }
                continue;
            }
            if trimmed.starts_with('[') {
                let inner = trimmed
                    .strip_suffix(']')
                    .map(|s| &s[1..])
                    .ok_or_else(|| syntax(line, indent + trimmed.len(), "section header must end with `]`"))?;
                let mut words = inner.split_whitespace();
                let kind = words.next().ok_or_else(|| syntax(line, indent + 2, "empty section header"))?.to_string();
                if !KINDS.contains(&kind.as_str()) {
                    return Err(syntax(line, indent + 2, format!("unknown section kind `{kind}`")));
                }
                let name = words.next().map(str::to_string);
                if words.next().is_some() {
                    return Err(syntax(line, indent + 2, "section names cannot contain spaces"));
                }
                if (kind == "defaults") != name.is_none() {
                    return Err(syntax(line, indent + 2, format!("section `{kind}` {} a name", if name.is_none() { "needs" } else { "takes no" })));
                }
                doc.sections.push(Section { kind, name, line, lines: Vec::new() });
                continue;
            }
            let section = doc.sections.last_mut().ok_or_else(|| syntax(line, indent + 1, "entry outside of a section"))?;
            let eq = trimmed.find('=').ok_or_else(|| syntax(line, indent + 1, "expected `key = value`"))?;
            let key = squash(&trimmed[..eq]);
            if key.is_empty() {
                return Err(syntax(line, indent + 1, "missing key"));
            }
            let value_part = &trimmed[eq + 1..];
            let column = indent + eq + 2 + (value_part.len() - value_part.trim_start().len());
            section.lines.push(Line::Entry { key, value: value_part.trim().to_string(), line, column });
        }
        Ok(doc)
    }

    /// Canonical text: comments as `# text`, one blank line between
    /// sections, entries as `key = value`.
    pub fn serialize(&self) -> String {
        let mut blocks = Vec::new();
        if !self.preamble.is_empty() {
            blocks.push(self.preamble.iter().map(|c| comment(c)).collect::<Vec<_>>().join("\n"));
        }
        for s in &self.sections {
            let mut out = match &s.name {
                Some(n) => format!("[{} {}]", s.kind, n),
                None => format!("[{}]", s.kind),
            };
            for l in &s.lines {
                out.push('\n');
                match l {
                    Line::Comment(c) => out.push_str(&comment(c)),
                    Line::Entry { key, value, .. } if value.is_empty() => out.push_str(&format!("{key} =")),
                    Line::Entry { key, value, .. } => out.push_str(&format!("{key} = {value}")),
                }
            }
            blocks.push(out);
        }
        let mut text = blocks.join("\n\n");
        text.push('\n');
        text
    }
}

fn comment(c: &str) -> String {
    if c.is_empty() {
        "#".into()
    } else {
        format!("# {c}")
    }
}

/// Command defaults and the objects commands act on.
#[derive(Clone, Debug)]
pub struct Defaults {
    pub window: i32,
    pub order: Option<u32>,
    pub hypothesis_check: bool,
    /// Named selections: `atlas`, `map`, `submanifold`, `deformation`,
    /// `composite`, `first`, `second`.
    pub picks: BTreeMap<String, String>,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults { window: 2, order: None, hypothesis_check: true, picks: BTreeMap::new() }
    }
}

/// A fully built scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub doc: Document,
    pub defaults: Defaults,
    pub rings: Vec<(String, Arc<ParamRing>)>,
    pub atlases: Vec<(String, Arc<PoissonAtlas>)>,
    pub maps: Vec<(String, Arc<PoissonMapData>)>,
    pub submanifolds: Vec<(String, Arc<SubmanifoldData>)>,
    pub deformations: Vec<(String, DeformationDatum)>,
}

fn lookup<'a, T>(items: &'a [(String, T)], name: &str) -> Result<&'a T> {
    items.iter().find(|(n, _)| n == name).map(|(_, t)| t).ok_or_else(|| Error::UnresolvedReference(name.to_string()))
}

fn field() -> Arc<ParamRing> {
    Arc::new(ParamRing::field())
}

struct Entry<'a> {
    words: Vec<&'a str>,
    value: &'a str,
    line: usize,
    column: usize,
}

impl Entry<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        syntax(self.line, self.column, message)
    }

    fn arity(&self, n: usize) -> Result<()> {
        if self.words.len() != n + 1 {
            return Err(syntax(self.line, 1, format!("`{}` takes {n} argument(s) before `=`", self.words[0])));
        }
        Ok(())
    }

    fn list(&self) -> Vec<&str> {
        if self.value.is_empty() {
            return Vec::new();
        }
        self.value.split(',').map(str::trim).collect()
    }

    fn polys(&self, ctx: &Arc<VarContext>) -> Result<Vec<Poly>> {
        self.list().into_iter().map(|s| parse_poly(ctx, s).map_err(|m| self.err(m))).collect()
    }

    fn bivector(&self, chart: &Arc<str>, ctx: &Arc<VarContext>) -> Result<Multivector> {
        parse_multivector(chart, ctx, ctx.n(), 2, self.value).map_err(|m| self.err(m))
    }

    fn int<T: std::str::FromStr>(&self) -> Result<T> {
        self.value.parse().map_err(|_| self.err(format!("`{}` is not a valid number", self.value)))
    }
}

fn entries(s: &Section) -> Vec<Entry<'_>> {
    s.lines
        .iter()
        .filter_map(|l| match l {
            Line::Entry { key, value, line, column } => Some(Entry { words: key.split(' ').collect(), value, line: *line, column: *column }),
            Line::Comment(_) => None,
        })
        .collect()
}

fn unknown(e: &Entry, kind: &str) -> Error {
    syntax(e.line, 1, format!("unknown key `{}` in a {kind} section", e.words.join(" ")))
}

fn chart_of(atlas: &PoissonAtlas, id: &str) -> Result<usize> {
    atlas.chart_index(id).ok_or_else(|| Error::UnresolvedReference(format!("{}.{id}", atlas.name)))
}

fn parse_bool(e: &Entry) -> Result<bool> {
    match e.value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(e.err("expected `true` or `false`")),
    }
}

/// Parse a monomial `t1*t2^2` in the parameter names.
fn parse_monomial(e: &Entry, names: &[String], text: &str) -> Result<Vec<u32>> {
    let mut exps = vec![0u32; names.len()];
    for factor in text.split('*').map(str::trim) {
        let (name, k) = match factor.split_once('^') {
            Some((n, k)) => (n.trim(), k.trim().parse::<u32>().map_err(|_| e.err(format!("bad exponent in `{factor}`")))?),
            None => (factor, 1),
        };
        let idx = names.iter().position(|n| n == name).ok_or_else(|| Error::UnresolvedReference(name.to_string()))?;
        exps[idx] += k;
    }
    Ok(exps)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        Scenario::build(Document::parse(text)?)
    }

    pub fn serialize(&self) -> String {
        self.doc.serialize()
    }

    fn build(doc: Document) -> Result<Scenario> {
        let mut scn = Scenario {
            doc: Document::default(),
            defaults: Defaults::default(),
            rings: Vec::new(),
            atlases: Vec::new(),
            maps: Vec::new(),
            submanifolds: Vec::new(),
            deformations: Vec::new(),
        };
        for s in &doc.sections {
            let name = s.name.clone().unwrap_or_default();
            let taken = match s.kind.as_str() {
                "ring" => scn.rings.iter().any(|(n, _)| *n == name),
                "atlas" | "submanifold" => scn.atlases.iter().any(|(n, _)| *n == name),
                "map" => scn.maps.iter().any(|(n, _)| *n == name),
                "deformation" => scn.deformations.iter().any(|(n, _)| *n == name),
                _ => false,
            };
            if taken {
                return Err(syntax(s.line, 2, format!("`{name}` is declared twice")));
            }
            match s.kind.as_str() {
                "defaults" => scn.defaults_section(s)?,
                "ring" => {
                    let r = ring_section(s)?;
                    scn.rings.push((name, Arc::new(r)));
                }
                "atlas" => {
                    let a = atlas_section(&name, s)?;
                    scn.atlases.push((name, Arc::new(a)));
                }
                "map" => {
                    let m = scn.map_section(&name, s)?;
                    scn.maps.push((name, Arc::new(m)));
                }
                "submanifold" => {
                    let sub = Arc::new(scn.submanifold_section(&name, s)?);
                    let x = Arc::new(sub.x_atlas()?);
                    let incl = sub.inclusion(x.clone())?;
                    scn.atlases.push((name.clone(), x));
                    if !scn.maps.iter().any(|(n, _)| *n == name) {
                        scn.maps.push((name.clone(), Arc::new(incl)));
                    }
                    scn.submanifolds.push((name, sub));
                }
                _ => {
                    let d = scn.deformation_section(&name, s)?;
                    scn.deformations.push((name, d));
                }
            }
        }
        scn.doc = doc;
        Ok(scn)
    }

    fn defaults_section(&mut self, s: &Section) -> Result<()> {
        for e in entries(s) {
            e.arity(0)?;
            match e.words[0] {
                "window" => self.defaults.window = e.int()?,
                "order" => self.defaults.order = Some(e.int()?),
                "hypothesis_check" => self.defaults.hypothesis_check = parse_bool(&e)?,
                "atlas" | "map" | "submanifold" | "deformation" | "composite" | "first" | "second" => {
                    self.defaults.picks.insert(e.words[0].to_string(), e.value.to_string());
                }
                _ => return Err(unknown(&e, "defaults")),
            }
        }
        Ok(())
    }

    fn map_section(&self, name: &str, s: &Section) -> Result<PoissonMapData> {
        let es = entries(s);
        let mut source = None;
        let mut target = None;
        let mut images: Vec<&Entry> = Vec::new();
        for e in &es {
            match e.words[0] {
                "identity" => {
                    e.arity(0)?;
                    let a = lookup(&self.atlases, e.value)?;
                    return Ok(PoissonMapData::identity(name, a.clone()));
                }
                "compose" => {
                    e.arity(0)?;
                    let names = e.list();
                    if names.len() != 2 {
                        return Err(e.err("`compose` takes `first, second`"));
                    }
                    let (f, g) = (lookup(&self.maps, names[0])?, lookup(&self.maps, names[1])?);
                    let mut h = compose(f, g)?;
                    h.name = name.to_string();
                    return Ok(h);
                }
                "inclusion" => {
                    e.arity(0)?;
                    let sub = lookup(&self.submanifolds, e.value)?;
                    let x = lookup(&self.atlases, e.value)?;
                    let mut m = sub.inclusion(x.clone())?;
                    m.name = name.to_string();
                    return Ok(m);
                }
                "source" => {
                    e.arity(0)?;
                    source = Some(lookup(&self.atlases, e.value)?.clone());
                }
                "target" => {
                    e.arity(0)?;
                    target = Some(lookup(&self.atlases, e.value)?.clone());
                }
                "image" => {
                    e.arity(2)?;
                    images.push(e);
                }
                _ => return Err(unknown(e, "map")),
            }
        }
        let x = source.ok_or_else(|| syntax(s.line, 1, format!("map `{name}` needs a source")))?;
        let y = target.ok_or_else(|| syntax(s.line, 1, format!("map `{name}` needs a target")))?;
        let mut assignment = vec![None; x.len()];
        let mut comps = vec![Vec::new(); x.len()];
        for e in images {
            let i = chart_of(&x, e.words[1])?;
            let a = chart_of(&y, e.words[2])?;
            assignment[i] = Some(a);
            comps[i] = e.polys(x.ctx(i))?;
        }
        let assignment = assignment
            .into_iter()
            .enumerate()
            .map(|(i, a)| a.ok_or_else(|| syntax(s.line, 1, format!("map `{name}` has no image for chart {}", x.charts[i].id))))
            .collect::<Result<Vec<_>>>()?;
        PoissonMapData::new(name, x, y, assignment, comps)
    }

    fn submanifold_section(&self, name: &str, s: &Section) -> Result<SubmanifoldData> {
        let es = entries(s);
        let mut ambient = None;
        let mut charts = Vec::new();
        for e in &es {
            match e.words[0] {
                "ambient" => {
                    e.arity(0)?;
                    ambient = Some(lookup(&self.atlases, e.value)?.clone());
                }
                "chart" => {
                    e.arity(1)?;
                    charts.push(e);
                }
                _ => return Err(unknown(e, "submanifold")),
            }
        }
        let y = ambient.ok_or_else(|| syntax(s.line, 1, format!("submanifold `{name}` needs an ambient atlas")))?;
        let mut idx = Vec::new();
        let mut defining = Vec::new();
        for e in charts {
            let a = chart_of(&y, e.words[1])?;
            let vars = e
                .list()
                .into_iter()
                .map(|v| y.ctx(a).var_index(v).ok_or_else(|| Error::UnresolvedReference(format!("{}.{v}", e.words[1]))))
                .collect::<Result<Vec<_>>>()?;
            idx.push(a);
            defining.push(vars);
        }
        SubmanifoldData::new(name, y, idx, defining)
    }

    fn deformation_section(&self, name: &str, s: &Section) -> Result<DeformationDatum> {
        let es = entries(s);
        let mut base = None;
        let mut ring = None;
        let mut mode = None;
        let mut rest = Vec::new();
        for e in &es {
            match e.words[0] {
                "map" => {
                    e.arity(0)?;
                    base = Some(lookup(&self.maps, e.value)?.clone());
                }
                "ring" => {
                    e.arity(0)?;
                    ring = Some(lookup(&self.rings, e.value)?.clone());
                }
                "mode" => {
                    e.arity(0)?;
                    mode = Some(Mode::parse(e.value).ok_or_else(|| e.err(format!("unknown mode `{}`", e.value)))?);
                }
                "component" | "source.transition" | "source.bivector" | "target.transition" | "target.bivector" => rest.push(e),
                _ => return Err(unknown(e, "deformation")),
            }
        }
        let base = base.ok_or_else(|| syntax(s.line, 1, format!("deformation `{name}` needs a map")))?;
        let ring = ring.ok_or_else(|| syntax(s.line, 1, format!("deformation `{name}` needs a ring")))?;
        let mode = mode.ok_or_else(|| syntax(s.line, 1, format!("deformation `{name}` needs a mode")))?;
        let source = deformed_atlas(&base.source, &ring, "source", &rest)?;
        let target = deformed_atlas(&base.target, &ring, "target", &rest)?;
        let mut comps: Vec<Vec<Poly>> = base.rebase(source.clone(), target.clone()).components;
        for e in rest.iter().filter(|e| e.words[0] == "component") {
            e.arity(1)?;
            let i = chart_of(&source, e.words[1])?;
            comps[i] = e.polys(source.ctx(i))?;
        }
        let map = base.with_components(source, target, comps)?;
        DeformationDatum::new(name, mode, base, Arc::new(map))
    }
}

fn ring_section(s: &Section) -> Result<ParamRing> {
    let es = entries(s);
    let mut names: Option<Vec<String>> = None;
    let mut order = None;
    let mut ideal_entry = None;
    for e in &es {
        e.arity(0)?;
        match e.words[0] {
            "params" => names = Some(e.list().into_iter().map(str::to_string).collect()),
            "order" => order = Some(e.int::<u32>()?),
            "ideal" => ideal_entry = Some(e),
            _ => return Err(unknown(e, "ring")),
        }
    }
    let names = names.ok_or_else(|| syntax(s.line, 1, "ring needs `params`"))?;
    let order = order.ok_or_else(|| syntax(s.line, 1, "ring needs `order`"))?;
    let mut ideal = Vec::new();
    if let Some(e) = ideal_entry {
        for m in e.list() {
            ideal.push(parse_monomial(e, &names, m)?);
        }
    }
    ParamRing::new(names, order, ideal)
}

fn atlas_section(name: &str, s: &Section) -> Result<PoissonAtlas> {
    let es = entries(s);
    let mut charts = Vec::new();
    for e in es.iter().filter(|e| e.words[0] == "chart") {
        e.arity(1)?;
        let vars = e.list();
        charts.push(Chart::new(e.words[1], &vars, &field()));
    }
    let ids: Vec<Arc<str>> = charts.iter().map(|c| c.id.clone()).collect();
    let index = |id: &str| -> Result<usize> { ids.iter().position(|c| &**c == id).ok_or_else(|| Error::UnresolvedReference(format!("{name}.{id}"))) };
    let mut transitions = Vec::new();
    let mut bivectors: Vec<Multivector> = charts.iter().map(|c| Multivector::zero(&c.id, &c.ctx, c.dim(), 2)).collect();
    for e in &es {
        match e.words[0] {
            "chart" => {}
            "transition" => {
                e.arity(2)?;
                let (i, j) = (index(e.words[1])?, index(e.words[2])?);
                transitions.push((i, j, e.polys(&charts[j].ctx)?));
            }
            "bivector" => {
                e.arity(1)?;
                let i = index(e.words[1])?;
                bivectors[i] = e.bivector(&charts[i].id, &charts[i].ctx)?;
            }
            "invertible" => {
                e.arity(1)?;
                let i = index(e.words[1])?;
                let vars =
                    e.list().into_iter().map(|v| charts[i].ctx.var_index(v).ok_or_else(|| Error::UnresolvedReference(v.to_string()))).collect::<Result<Vec<_>>>()?;
                charts[i].invertible = vars;
            }
            _ => return Err(unknown(e, "atlas")),
        }
    }
    PoissonAtlas::new(name, charts, transitions, bivectors)
}

/// The base atlas over `ring` with the `side.*` entries applied. Given
/// transitions must list the lower chart first; reverse transitions are
/// recomputed as formal inverses.
fn deformed_atlas(base: &Arc<PoissonAtlas>, ring: &Arc<ParamRing>, side: &str, es: &[&Entry]) -> Result<Arc<PoissonAtlas>> {
    let lifted = base.with_ring(ring);
    let mut transitions = lifted.transition_list();
    let mut bivectors = lifted.bivectors.clone();
    let mut touched = false;
    let mut moved = false;
    for e in es {
        let Some(what) = e.words[0].strip_prefix(side).and_then(|w| w.strip_prefix('.')) else { continue };
        touched = true;
        if what == "transition" {
            e.arity(2)?;
            let (i, j) = (chart_of(&lifted, e.words[1])?, chart_of(&lifted, e.words[2])?);
            if i >= j {
                return Err(e.err("deformed transitions are given for a lower chart from a higher one"));
            }
            let comps = e.polys(lifted.ctx(j))?;
            for t in transitions.iter_mut().filter(|t| t.0 == i && t.1 == j) {
                t.2 = comps.clone();
            }
            moved = true;
        } else {
            e.arity(1)?;
            let i = chart_of(&lifted, e.words[1])?;
            bivectors[i] = e.bivector(&lifted.charts[i].id, lifted.ctx(i))?;
        }
    }
    if !touched {
        return Ok(Arc::new(lifted));
    }
    let atlas = lifted.with_data(transitions, bivectors)?;
    Ok(Arc::new(if moved { normalize_inverses(&atlas, base)? } else { atlas }))
}
