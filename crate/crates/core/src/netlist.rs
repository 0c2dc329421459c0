//! Line-oriented model files.
//!
//! ```text
//! # cantilever microbeam
//! material si E=1.69e11 rho=2330
//! section s1 rect w=2e-5 t=2e-6
//! node n1 0 0
//! node n2 5e-4 0
//! fix n1 ux uy rz
//! beam b1 n1 n2 mat=si sec=s1 n=8
//! force n2 fy=7.3e-4
//! analysis static
//! ```
//!
//! `#` starts a comment. Declarations may appear in any order.

use std::fmt;
use std::fmt::Write as _;

use crate::model::{
    rect_section, validate_model, AnalysisSpec, Beam, Constraint, Dof, DofSet, EntityKind, Load, Material, Model,
    NonlinearSettings, Node, Section,
};

/// 1-based line and column range `[col_start, col_end)` within a line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagnosticCategory {
    Syntax,
    Reference,
    Range,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub message: String,
    pub kind: DiagnosticCategory,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col_start, self.message)
    }
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    span: SourceSpan,
}

fn tokenize(line: &str, number: usize) -> Vec<Token<'_>> {
    let code = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in code.char_indices().chain(std::iter::once((code.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                let col_start = code[..s].chars().count() + 1;
                let col_end = col_start + code[s..i].chars().count();
                out.push(Token {
                    text: &code[s..i],
                    span: SourceSpan {
                        line: number,
                        col_start,
                        col_end,
                    },
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

struct Parser {
    diags: Vec<ParseDiagnostic>,
}

impl Parser {
    fn error(&mut self, span: SourceSpan, kind: DiagnosticCategory, message: impl Into<String>) {
        self.diags.push(ParseDiagnostic {
            span,
            message: message.into(),
            kind,
        });
    }

    fn number(&mut self, tok: Token<'_>, text: &str, what: &str) -> Option<f64> {
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.error(tok.span, DiagnosticCategory::Syntax, format!("expected a number for {what}, got `{text}`"));
                None
            }
        }
    }

    fn count(&mut self, tok: Token<'_>, text: &str, what: &str) -> Option<usize> {
        match text.parse::<i64>() {
            Ok(v) if v >= 1 => Some(v as usize),
            Ok(v) => {
                self.error(tok.span, DiagnosticCategory::Range, format!("{what} must be at least 1, got {v}"));
                None
            }
            Err(_) => {
                self.error(tok.span, DiagnosticCategory::Syntax, format!("expected an integer for {what}, got `{text}`"));
                None
            }
        }
    }

    fn positive(&mut self, tok: Token<'_>, text: &str, what: &str) -> Option<f64> {
        let v = self.number(tok, text, what)?;
        if v > 0.0 {
            Some(v)
        } else {
            self.error(tok.span, DiagnosticCategory::Range, format!("{what} must be positive, got {text}"));
            None
        }
    }

    /// Splits `key=value` tokens, checking each key is allowed and unique.
    fn pairs<'a>(&mut self, toks: &[Token<'a>], allowed: &[&str]) -> Vec<(Token<'a>, &'a str, &'a str)> {
        let mut out: Vec<(Token<'a>, &'a str, &'a str)> = Vec::new();
        for &tok in toks {
            let Some((key, value)) = tok.text.split_once('=') else {
                self.error(tok.span, DiagnosticCategory::Syntax, format!("expected key=value, got `{}`", tok.text));
                continue;
            };
            if !allowed.contains(&key) {
                self.error(
                    tok.span,
                    DiagnosticCategory::Syntax,
                    format!("unknown key `{key}` (expected one of {})", allowed.join(", ")),
                );
            } else if out.iter().any(|(_, k, _)| *k == key) {
                self.error(tok.span, DiagnosticCategory::Syntax, format!("key `{key}` given twice"));
            } else if value.is_empty() {
                self.error(tok.span, DiagnosticCategory::Syntax, format!("missing value for `{key}`"));
            } else {
                out.push((tok, key, value));
            }
        }
        out
    }

    fn required<'a>(
        &mut self,
        pairs: &[(Token<'a>, &'a str, &'a str)],
        key: &str,
        line_span: SourceSpan,
    ) -> Option<(Token<'a>, &'a str)> {
        match pairs.iter().find(|(_, k, _)| *k == key) {
            Some(&(t, _, v)) => Some((t, v)),
            None => {
                self.error(line_span, DiagnosticCategory::Syntax, format!("missing `{key}=`"));
                None
            }
        }
    }

    fn arity(&mut self, toks: &[Token<'_>], min: usize, usage: &str) -> bool {
        if toks.len() < min {
            let span = toks.last().map_or(toks[0].span, |t| t.span);
            self.error(span, DiagnosticCategory::Syntax, format!("expected `{usage}`"));
            false
        } else {
            true
        }
    }
}

fn line_span(toks: &[Token<'_>]) -> SourceSpan {
    SourceSpan {
        line: toks[0].span.line,
        col_start: toks[0].span.col_start,
        col_end: toks[toks.len() - 1].span.col_end,
    }
}

/// Declaration lines of each entity, indexed like the model collections.
#[derive(Default)]
struct Origins {
    materials: Vec<SourceSpan>,
    sections: Vec<SourceSpan>,
    nodes: Vec<SourceSpan>,
    beams: Vec<SourceSpan>,
    constraints: Vec<SourceSpan>,
    loads: Vec<SourceSpan>,
    analysis: Option<SourceSpan>,
}

impl Origins {
    fn of(&self, entity: EntityKind, index: usize) -> Option<SourceSpan> {
        let list = match entity {
            EntityKind::Material => &self.materials,
            EntityKind::Section => &self.sections,
            EntityKind::Node => &self.nodes,
            EntityKind::Beam => &self.beams,
            EntityKind::Constraint => &self.constraints,
            EntityKind::Load => &self.loads,
            EntityKind::Analysis | EntityKind::Model => return self.analysis,
        };
        list.get(index).copied()
    }
}

fn parse_analysis(p: &mut Parser, toks: &[Token<'_>]) -> Option<AnalysisSpec> {
    if !p.arity(toks, 2, "analysis static|buckling|modal|nonlinear [key=value ...]") {
        return None;
    }
    let kind = toks[1];
    let rest = &toks[2..];
    let span = line_span(toks);
    match kind.text {
        "static" => {
            p.pairs(rest, &[]);
            Some(AnalysisSpec::LinearStatic)
        }
        "buckling" => {
            let kv = p.pairs(rest, &["n"]);
            let mut modes = Some(AnalysisSpec::DEFAULT_BUCKLING_MODES);
            for (t, _, v) in kv {
                modes = p.count(t, v, "n");
            }
            Some(AnalysisSpec::Buckling { modes: modes? })
        }
        "modal" => {
            let kv = p.pairs(rest, &["n", "order"]);
            let (mut modes, mut order) = (Some(AnalysisSpec::DEFAULT_MODAL_MODES), Some(AnalysisSpec::DEFAULT_MODAL_ORDER));
            for (t, k, v) in kv {
                match k {
                    "n" => modes = p.count(t, v, "n"),
                    _ => {
                        order = match v.parse::<usize>() {
                            Ok(o) => Some(o),
                            Err(_) => {
                                p.error(t.span, DiagnosticCategory::Syntax, format!("expected an integer for order, got `{v}`"));
                                None
                            }
                        }
                    }
                }
            }
            Some(AnalysisSpec::Modal { modes: modes?, order: order? })
        }
        "nonlinear" => {
            let kv = p.pairs(rest, &["steps", "tol", "maxiter"]);
            let mut s = Some(NonlinearSettings::default());
            for (t, k, v) in kv {
                let field = match k {
                    "steps" => p.count(t, v, "steps").map(|n| (0, n as f64)),
                    "tol" => p.positive(t, v, "tol").map(|x| (1, x)),
                    _ => p.count(t, v, "maxiter").map(|n| (2, n as f64)),
                };
                match (field, s.as_mut()) {
                    (Some((0, x)), Some(s)) => s.steps = x as usize,
                    (Some((1, x)), Some(s)) => s.tol = x,
                    (Some((_, x)), Some(s)) => s.max_iter = x as usize,
                    (None, _) => s = None,
                    _ => {}
                }
            }
            Some(AnalysisSpec::NonlinearStatic(s?))
        }
        other => {
            p.error(
                kind.span,
                DiagnosticCategory::Syntax,
                format!("unknown analysis `{other}` (expected static, buckling, modal or nonlinear)"),
            );
            let _ = span;
            None
        }
    }
}

/// Parses a model file. On failure every diagnosable problem is reported,
/// sorted by position.
pub fn parse_model(text: &str) -> Result<Model, Vec<ParseDiagnostic>> {
    let mut p = Parser { diags: Vec::new() };
    let mut model = Model::new(AnalysisSpec::LinearStatic);
    let mut origins = Origins::default();
    let mut analysis: Option<AnalysisSpec> = None;

    for (i, raw) in text.lines().enumerate() {
        let toks = tokenize(raw, i + 1);
        let Some(&head) = toks.first() else { continue };
        let span = line_span(&toks);
        match head.text {
            "material" => {
                if !p.arity(&toks, 2, "material <name> E=<Pa> rho=<kg/m3>") {
                    continue;
                }
                let kv = p.pairs(&toks[2..], &["E", "rho"]);
                let e = p.required(&kv, "E", span).and_then(|(t, v)| p.positive(t, v, "E"));
                let rho = p.required(&kv, "rho", span).and_then(|(t, v)| p.positive(t, v, "rho"));
                if let (Some(e), Some(rho)) = (e, rho) {
                    model.materials.push(Material {
                        name: toks[1].text.to_string(),
                        youngs_modulus: e,
                        density: rho,
                    });
                    origins.materials.push(span);
                }
            }
            "section" => {
                if !p.arity(&toks, 3, "section <name> rect w=<m> t=<m> | section <name> A=<m2> I=<m4>") {
                    continue;
                }
                let name = toks[1].text.to_string();
                let section = if toks[2].text == "rect" {
                    let kv = p.pairs(&toks[3..], &["w", "t"]);
                    let w = p.required(&kv, "w", span).and_then(|(t, v)| p.positive(t, v, "w"));
                    let t = p.required(&kv, "t", span).and_then(|(t, v)| p.positive(t, v, "t"));
                    match (w, t) {
                        (Some(w), Some(t)) => rect_section(name, w, t).ok(),
                        _ => None,
                    }
                } else {
                    let kv = p.pairs(&toks[2..], &["A", "I"]);
                    let a = p.required(&kv, "A", span).and_then(|(t, v)| p.positive(t, v, "A"));
                    let i = p.required(&kv, "I", span).and_then(|(t, v)| p.positive(t, v, "I"));
                    match (a, i) {
                        (Some(area), Some(inertia)) => Some(Section {
                            name,
                            area,
                            inertia,
                            rect: None,
                        }),
                        _ => None,
                    }
                };
                if let Some(s) = section {
                    model.sections.push(s);
                    origins.sections.push(span);
                }
            }
            "node" => {
                if !p.arity(&toks, 4, "node <name> <x> <y>") {
                    continue;
                }
                if let Some(extra) = toks.get(4) {
                    p.error(extra.span, DiagnosticCategory::Syntax, format!("unexpected `{}`", extra.text));
                }
                let x = p.number(toks[2], toks[2].text, "x");
                let y = p.number(toks[3], toks[3].text, "y");
                if let (Some(x), Some(y)) = (x, y) {
                    model.nodes.push(Node {
                        name: toks[1].text.to_string(),
                        x,
                        y,
                    });
                    origins.nodes.push(span);
                }
            }
            "fix" => {
                if !p.arity(&toks, 2, "fix <node> [ux] [uy] [rz]") {
                    continue;
                }
                let mut fixed = DofSet::EMPTY;
                let mut ok = true;
                for t in &toks[2..] {
                    match Dof::from_keyword(t.text) {
                        Some(d) if fixed.contains(d) => {
                            p.error(t.span, DiagnosticCategory::Syntax, format!("DOF `{}` listed twice", t.text));
                            ok = false;
                        }
                        Some(d) => fixed = fixed.with(d),
                        None => {
                            p.error(
                                t.span,
                                DiagnosticCategory::Syntax,
                                format!("unknown DOF `{}` (expected ux, uy or rz)", t.text),
                            );
                            ok = false;
                        }
                    }
                }
                if toks.len() == 2 {
                    fixed = DofSet::ALL;
                }
                if ok {
                    model.constraints.push(Constraint {
                        node: toks[1].text.to_string(),
                        fixed,
                    });
                    origins.constraints.push(span);
                }
            }
            "beam" => {
                if !p.arity(&toks, 4, "beam <name> <node> <node> mat=<material> sec=<section> [n=<count>]") {
                    continue;
                }
                let kv = p.pairs(&toks[4..], &["mat", "sec", "n"]);
                let mat = p.required(&kv, "mat", span).map(|(_, v)| v.to_string());
                let sec = p.required(&kv, "sec", span).map(|(_, v)| v.to_string());
                let n = match kv.iter().find(|(_, k, _)| *k == "n") {
                    Some(&(t, _, v)) => p.count(t, v, "n"),
                    None => Some(1),
                };
                if let (Some(material), Some(section), Some(subdivisions)) = (mat, sec, n) {
                    model.beams.push(Beam {
                        name: toks[1].text.to_string(),
                        node_a: toks[2].text.to_string(),
                        node_b: toks[3].text.to_string(),
                        material,
                        section,
                        subdivisions,
                    });
                    origins.beams.push(span);
                }
            }
            "force" => {
                if !p.arity(&toks, 3, "force <node> [fx=<N>] [fy=<N>] [mz=<N m>]") {
                    continue;
                }
                let kv = p.pairs(&toks[2..], &["fx", "fy", "mz"]);
                let mut load = Load {
                    node: toks[1].text.to_string(),
                    fx: 0.0,
                    fy: 0.0,
                    mz: 0.0,
                };
                let mut ok = true;
                for (t, k, v) in kv {
                    match p.number(t, v, k) {
                        Some(x) => match k {
                            "fx" => load.fx = x,
                            "fy" => load.fy = x,
                            _ => load.mz = x,
                        },
                        None => ok = false,
                    }
                }
                if ok {
                    model.loads.push(load);
                    origins.loads.push(span);
                }
            }
            "analysis" => {
                if let Some(first) = origins.analysis {
                    p.error(
                        span,
                        DiagnosticCategory::Syntax,
                        format!("duplicate analysis line (first given on line {})", first.line),
                    );
                    continue;
                }
                origins.analysis = Some(span);
                analysis = parse_analysis(&mut p, &toks);
            }
            other => p.error(
                head.span,
                DiagnosticCategory::Syntax,
                format!("unknown keyword `{other}` (expected material, section, node, fix, beam, force or analysis)"),
            ),
        }
    }

    match analysis {
        Some(a) => model.analysis = a,
        None if origins.analysis.is_none() => {
            let line = text.lines().count().max(1);
            p.error(
                SourceSpan {
                    line,
                    col_start: 1,
                    col_end: 2,
                },
                DiagnosticCategory::Syntax,
                "no analysis specified",
            );
        }
        None => {}
    }

    // Semantic checks on what parsed cleanly, mapped back to source lines.
    let fallback = SourceSpan {
        line: 1,
        col_start: 1,
        col_end: 2,
    };
    for d in validate_model(&model) {
        use crate::model::DiagnosticKind as K;
        if analysis.is_none() && d.kind == K::Unconstrained {
            continue;
        }
        let span = origins.of(d.location.entity, d.location.index).unwrap_or(fallback);
        let kind = match d.kind {
            K::DanglingReference => DiagnosticCategory::Reference,
            K::InvalidValue | K::ZeroLengthBeam => DiagnosticCategory::Range,
            K::DuplicateName | K::EmptyConstraint | K::Unconstrained => DiagnosticCategory::Syntax,
        };
        // an unparsed analysis line already has its own diagnostic
        if origins.analysis.is_some() && analysis.is_none() && d.location.entity == EntityKind::Analysis {
            continue;
        }
        p.error(span, kind, d.message);
    }

    if p.diags.is_empty() {
        Ok(model)
    } else {
        p.diags.sort_by_key(|d| d.span);
        Err(p.diags)
    }
}

/// Writes `model` in the file format. Numbers use the shortest
/// representation that parses back to the same value.
pub fn serialize_model(model: &Model) -> String {
    let mut s = String::new();
    for m in &model.materials {
        let _ = writeln!(s, "material {} E={:?} rho={:?}", m.name, m.youngs_modulus, m.density);
    }
    for sec in &model.sections {
        match sec.rect {
            Some(r) => {
                let _ = writeln!(s, "section {} rect w={:?} t={:?}", sec.name, r.width, r.thickness);
            }
            None => {
                let _ = writeln!(s, "section {} A={:?} I={:?}", sec.name, sec.area, sec.inertia);
            }
        }
    }
    for n in &model.nodes {
        let _ = writeln!(s, "node {} {:?} {:?}", n.name, n.x, n.y);
    }
    for c in &model.constraints {
        let dofs: Vec<&str> = c.fixed.iter().map(Dof::keyword).collect();
        let _ = writeln!(s, "fix {} {}", c.node, dofs.join(" "));
    }
    for b in &model.beams {
        let _ = writeln!(
            s,
            "beam {} {} {} mat={} sec={} n={}",
            b.name, b.node_a, b.node_b, b.material, b.section, b.subdivisions
        );
    }
    for l in &model.loads {
        let _ = writeln!(s, "force {} fx={:?} fy={:?} mz={:?}", l.node, l.fx, l.fy, l.mz);
    }
    let _ = match model.analysis {
        AnalysisSpec::LinearStatic => writeln!(s, "analysis static"),
        AnalysisSpec::Buckling { modes } => writeln!(s, "analysis buckling n={modes}"),
        AnalysisSpec::Modal { modes, order } => writeln!(s, "analysis modal n={modes} order={order}"),
        AnalysisSpec::NonlinearStatic(n) => writeln!(
            s,
            "analysis nonlinear steps={} tol={:?} maxiter={}",
            n.steps, n.tol, n.max_iter
        ),
    };
    s
}
