//! Look-up table from transpiled segment signatures to rotation templates.
//!
//! Text format, one record per line:
//!
//! ```text
//! options level=1 zero_tol=1e-9 n_physical=1 edges=-
//! entry signature=rz,sx,rz,sx,rz template=rx,ry,rz k=3 rz_slots=0,1,2 origin=natural
//! ambiguous signature=rz,sx,rz,sx,rz candidates=rx,ry,rz|ry,rz
//! note <free text>
//! ```

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write;
use std::path::Path;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::transpiler::{synthesize_1q, transpile, CouplingMap, TranspileOptions};

use super::{kinds_from_str, kinds_to_string, validate_template, SegmentSignature, Template};

/// Templates listed here win signature collisions in this order; any other
/// template ranks after them in the order it was given.
pub const PRIORITY: [&[GateKind]; 2] = [
    &[GateKind::Rx, GateKind::Ry, GateKind::Rz],
    &[GateKind::Ry, GateKind::Rz],
];

const GENERIC: [[f64; 4]; 2] = [[0.41, 1.13, 0.77, 1.61], [2.37, 1.93, 2.71, 0.59]];
const DEGENERATE: [f64; 4] = [0.0, FRAC_PI_2, -FRAC_PI_2, PI];

#[derive(Debug, Clone, PartialEq)]
pub struct LutEntry {
    pub signature: SegmentSignature,
    pub template: Template,
    pub k: usize,
    pub rz_slots: Vec<usize>,
    /// True when generic probe angles produce this signature; false for
    /// shortened signatures that only appear at special angles.
    pub natural: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LutRecord {
    Entry(LutEntry),
    Ambiguous {
        signature: SegmentSignature,
        candidates: Vec<Template>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lut {
    pub options: TranspileOptions,
    pub records: BTreeMap<SegmentSignature, LutRecord>,
    /// Collisions resolved at build time.
    pub notes: Vec<String>,
}

impl Lut {
    /// `Ok(None)` when the signature is unknown; an error when it is
    /// ambiguous.
    pub fn lookup(&self, sig: &SegmentSignature) -> Result<Option<&LutEntry>> {
        match self.records.get(sig) {
            None => Ok(None),
            Some(LutRecord::Entry(e)) => Ok(Some(e)),
            Some(LutRecord::Ambiguous {
                signature,
                candidates,
            }) => Err(Error::Ambiguous {
                signature: signature.to_string(),
                candidates: candidates
                    .iter()
                    .map(|t| format!("[{}]", kinds_to_string(t)))
                    .collect::<Vec<_>>()
                    .join(" "),
            }),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &LutEntry> {
        self.records.values().filter_map(|r| match r {
            LutRecord::Entry(e) => Some(e),
            LutRecord::Ambiguous { .. } => None,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let o = &self.options;
        let edges: Vec<String> = o.coupling.edges().map(|(a, b)| format!("{a}-{b}")).collect();
        writeln!(
            s,
            "options level={} zero_tol={:e} n_physical={} edges={}",
            o.optimization_level,
            o.zero_tol,
            o.coupling.n_physical(),
            if edges.is_empty() { "-".into() } else { edges.join(",") }
        )
        .unwrap();
        for rec in self.records.values() {
            match rec {
                LutRecord::Entry(e) => writeln!(
                    s,
                    "entry signature={} template={} k={} rz_slots={} origin={}",
                    e.signature,
                    kinds_to_string(&e.template),
                    e.k,
                    if e.rz_slots.is_empty() {
                        "-".into()
                    } else {
                        e.rz_slots.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                    },
                    if e.natural { "natural" } else { "degenerate" }
                )
                .unwrap(),
                LutRecord::Ambiguous {
                    signature,
                    candidates,
                } => writeln!(
                    s,
                    "ambiguous signature={} candidates={}",
                    signature,
                    candidates.iter().map(|t| kinds_to_string(t)).collect::<Vec<_>>().join("|")
                )
                .unwrap(),
            }
        }
        for n in &self.notes {
            writeln!(s, "note {n}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Lut> {
        let mut options = None;
        let mut records = BTreeMap::new();
        let mut notes = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            let bad = |m: &str| Error::Format(format!("lut line {}: {m}", ln + 1));
            if head == "note" {
                notes.push(rest.to_string());
                continue;
            }
            let fields: BTreeMap<&str, &str> = rest
                .split_whitespace()
                .map(|kv| kv.split_once('=').ok_or_else(|| bad("expected key=value")))
                .collect::<Result<_>>()?;
            let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(&format!("missing `{k}`")));
            match head {
                "options" => {
                    let level = get("level")?.parse().map_err(|_| bad("bad level"))?;
                    let tol = get("zero_tol")?.parse().map_err(|_| bad("bad zero_tol"))?;
                    let n: usize = get("n_physical")?.parse().map_err(|_| bad("bad n_physical"))?;
                    let mut edges = Vec::new();
                    let e = get("edges")?;
                    if e != "-" {
                        for pair in e.split(',') {
                            let (a, b) = pair.split_once('-').ok_or_else(|| bad("bad edge"))?;
                            edges.push((
                                a.parse().map_err(|_| bad("bad edge"))?,
                                b.parse().map_err(|_| bad("bad edge"))?,
                            ));
                        }
                    }
                    options = Some(TranspileOptions::new(
                        level,
                        CouplingMap::from_edges(n, &edges)?,
                        tol,
                    )?);
                }
                "entry" => {
                    let signature = SegmentSignature(kinds_from_str(get("signature")?)?);
                    let template = kinds_from_str(get("template")?)?;
                    validate_template(&template)?;
                    let k: usize = get("k")?.parse().map_err(|_| bad("bad k"))?;
                    if k != template.len() {
                        return Err(bad("k does not match template length"));
                    }
                    let slots = get("rz_slots")?;
                    let rz_slots = if slots == "-" {
                        Vec::new()
                    } else {
                        slots
                            .split(',')
                            .map(|x| x.parse().map_err(|_| bad("bad rz_slots")))
                            .collect::<Result<Vec<usize>>>()?
                    };
                    if rz_slots.len() != signature.rz_count() {
                        return Err(bad("rz_slots length does not match signature"));
                    }
                    let natural = match get("origin")? {
                        "natural" => true,
                        "degenerate" => false,
                        _ => return Err(bad("bad origin")),
                    };
                    records.insert(
                        signature.clone(),
                        LutRecord::Entry(LutEntry {
                            signature,
                            template,
                            k,
                            rz_slots,
                            natural,
                        }),
                    );
                }
                "ambiguous" => {
                    let signature = SegmentSignature(kinds_from_str(get("signature")?)?);
                    let candidates = get("candidates")?
                        .split('|')
                        .map(kinds_from_str)
                        .collect::<Result<Vec<_>>>()?;
                    records.insert(
                        signature.clone(),
                        LutRecord::Ambiguous {
                            signature,
                            candidates,
                        },
                    );
                }
                other => return Err(bad(&format!("unknown record `{other}`"))),
            }
        }
        Ok(Lut {
            options: options.ok_or_else(|| Error::Format("lut has no options line".into()))?,
            records,
            notes,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Lut> {
        Lut::from_text(&std::fs::read_to_string(path)?)
    }
}

struct Candidate {
    rank: usize,
    template: Template,
    rz_slots: Vec<usize>,
    natural: bool,
}

fn priority_order(templates: &[Template]) -> Vec<Template> {
    let mut out: Vec<Template> = Vec::new();
    for p in PRIORITY {
        if templates.iter().any(|t| t.as_slice() == p) {
            out.push(p.to_vec());
        }
    }
    for t in templates {
        if !out.contains(t) {
            out.push(t.clone());
        }
    }
    out
}

/// Probe angle vectors for a template of length `k`: the generic ones
/// (all magnitudes away from multiples of π/2, every sign pattern) and the
/// degenerate ones (any coordinate replaced by 0, ±π/2 or π).
fn probes(k: usize) -> Vec<(Vec<f64>, bool)> {
    let mut out = Vec::new();
    for set in GENERIC {
        for signs in 0..1u32 << k {
            let v = (0..k)
                .map(|i| if signs >> i & 1 == 1 { -set[i] } else { set[i] })
                .collect();
            out.push((v, true));
        }
    }
    let choices = |i: usize| -> Vec<f64> {
        let mut c = vec![GENERIC[0][i], -GENERIC[0][i]];
        c.extend(DEGENERATE);
        c
    };
    let per = 2 + DEGENERATE.len();
    for code in 0..per.pow(k as u32) {
        let mut v = Vec::with_capacity(k);
        let mut rem = code;
        let mut degenerate = false;
        for i in 0..k {
            let idx = rem % per;
            rem /= per;
            degenerate |= idx >= 2;
            v.push(choices(i)[idx]);
        }
        if degenerate {
            out.push((v, false));
        }
    }
    out
}

/// Transpile every template at probe angles and record the signatures.
///
/// Collisions: a natural signature beats a degenerate one; among equals,
/// same-length templates resolve by priority and different lengths become
/// an ambiguous record. Every resolution is kept in `notes`.
pub fn build_lut(templates: &[Template], opts: &TranspileOptions) -> Result<Lut> {
    opts.validate()?;
    if templates.is_empty() {
        return Err(Error::Precondition("no templates given".into()));
    }
    for t in templates {
        validate_template(t)?;
    }
    let one_qubit = opts.with_width(1);
    let ordered = priority_order(templates);
    let mut found: BTreeMap<SegmentSignature, Vec<Candidate>> = BTreeMap::new();

    for (rank, template) in ordered.iter().enumerate() {
        for (angles, natural) in probes(template.len()) {
            let mut c = Circuit::new(1)?;
            for (&kind, &a) in template.iter().zip(&angles) {
                c.push(Gate::rotation(kind, 0, a))?;
            }
            let out = transpile(&c, &one_qubit)?.circuit;
            let sig = SegmentSignature(out.gates().iter().map(|g| g.kind()).collect());
            if sig.is_empty() {
                continue;
            }
            let synth = synthesize_1q(
                &crate::simulator::fuse_1q(c.gates())?,
                opts.optimization_level,
                opts.zero_tol,
            )?;
            let kinds: Vec<GateKind> = synth.gates.iter().map(|g| g.kind).collect();
            if kinds != sig.0 {
                return Err(Error::Precondition(format!(
                    "synthesis provenance [{}] disagrees with transpiled [{sig}]",
                    kinds_to_string(&kinds)
                )));
            }
            let rz_slots: Vec<usize> = synth.gates.iter().filter_map(|g| g.slot).collect();
            let list = found.entry(sig).or_default();
            match list.iter_mut().find(|c| c.rank == rank) {
                Some(existing) => existing.natural |= natural,
                None => list.push(Candidate {
                    rank,
                    template: template.clone(),
                    rz_slots,
                    natural,
                }),
            }
        }
    }

    let mut records = BTreeMap::new();
    let mut notes = Vec::new();
    for (sig, mut cands) in found {
        let any_natural = cands.iter().any(|c| c.natural);
        if any_natural {
            let dropped: Vec<String> = cands
                .iter()
                .filter(|c| !c.natural)
                .map(|c| kinds_to_string(&c.template))
                .collect();
            if !dropped.is_empty() {
                notes.push(format!(
                    "[{sig}] natural form preferred over degenerate form of {}",
                    dropped.join(" ")
                ));
            }
            cands.retain(|c| c.natural);
        }
        cands.sort_by_key(|c| c.rank);
        let k0 = cands[0].template.len();
        if cands.iter().any(|c| c.template.len() != k0) {
            let list: Vec<Template> = cands.iter().map(|c| c.template.clone()).collect();
            notes.push(format!(
                "[{sig}] ambiguous between {}",
                list.iter().map(|t| format!("[{}]", kinds_to_string(t))).collect::<Vec<_>>().join(" ")
            ));
            records.insert(
                sig.clone(),
                LutRecord::Ambiguous {
                    signature: sig,
                    candidates: list,
                },
            );
            continue;
        }
        if cands.len() > 1 {
            notes.push(format!(
                "[{sig}] shared by {}; kept [{}] by priority",
                cands.iter().map(|c| format!("[{}]", kinds_to_string(&c.template))).collect::<Vec<_>>().join(" "),
                kinds_to_string(&cands[0].template)
            ));
        }
        let c = cands.swap_remove(0);
        records.insert(
            sig.clone(),
            LutRecord::Entry(LutEntry {
                signature: sig,
                k: c.template.len(),
                template: c.template,
                rz_slots: c.rz_slots,
                natural: c.natural,
            }),
        );
    }
    Ok(Lut {
        options: opts.clone(),
        records,
        notes,
    })
}
