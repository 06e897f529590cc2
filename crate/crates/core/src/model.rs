//! JSON model files: an isometry (dense or named builder), an algebra tag and a gauge block.

use serde::Deserialize;
use serde_json::Value;

use crate::builders;
use crate::error::{Error, Result};
use crate::gauge::{GaugeAction, GroupTag, ModeAction};
use crate::linalg::{CMatrix, C64};
use crate::selfdual::{BlockOperator, SelfDualSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraTag {
    Car,
    Ccr,
}

impl std::fmt::Display for AlgebraTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlgebraTag::Car => write!(f, "car"),
            AlgebraTag::Ccr => write!(f, "ccr"),
        }
    }
}

/// Named builders and their parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Builder {
    Identity {
        modes: usize,
    },
    Shift {
        domain_modes: usize,
        steps: usize,
        species: usize,
    },
    Flip {
        modes: usize,
        flipped: Vec<usize>,
    },
    Bogoliubov {
        theta: f64,
    },
    Squeeze {
        r: f64,
        two_mode: bool,
    },
    SeaShift {
        w: usize,
    },
    Permutation {
        perm: Vec<usize>,
    },
    DiracV {
        w: usize,
        m_loc: usize,
    },
}

#[derive(Clone, Debug)]
pub enum Isometry {
    Dense(BlockOperator),
    Named(Builder),
}

#[derive(Clone, Debug)]
pub struct GaugeSpec {
    pub action: GaugeAction,
    pub sample_size: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct Model {
    pub labels: Option<Vec<String>>,
    pub isometry: Isometry,
    pub algebra: Option<AlgebraTag>,
    pub gauge: Option<GaugeSpec>,
}

/// Operator plus the charges a builder attaches to its modes.
#[derive(Clone, Debug)]
pub struct Realized {
    pub v: BlockOperator,
    pub charges: Option<(Vec<i32>, Vec<i32>)>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn get_usize(obj: &Value, key: &str) -> Result<Option<usize>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|x| Some(x as usize))
            .ok_or_else(|| bad(format!("`{key}` must be a non-negative integer"))),
    }
}

fn get_f64(obj: &Value, key: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| bad(format!("`{key}` must be a number"))),
    }
}

fn usize_list(v: &Value, what: &str) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| bad(format!("`{what}` must be an array")))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| bad(format!("`{what}` entries must be integers")))
        })
        .collect()
}

fn i32_list(v: &Value, what: &str) -> Result<Vec<i32>> {
    v.as_array()
        .ok_or_else(|| bad(format!("`{what}` must be an array")))?
        .iter()
        .map(|x| {
            x.as_i64()
                .and_then(|x| i32::try_from(x).ok())
                .ok_or_else(|| bad(format!("`{what}` entries must be integers")))
        })
        .collect()
}

fn real_rows(v: &Value, what: &str) -> Result<Vec<Vec<f64>>> {
    let rows = v
        .as_array()
        .ok_or_else(|| bad(format!("`{what}` must be an array of rows")))?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            r.as_array()
                .ok_or_else(|| bad(format!("`{what}` row {i} is not an array")))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| bad(format!("`{what}` row {i} has a non-number")))
                })
                .collect()
        })
        .collect()
}

/// `{"re": [[..], ..], "im": [[..], ..]}`; `im` may be omitted.
pub fn parse_matrix(v: &Value) -> Result<CMatrix> {
    let re = real_rows(v.get("re").ok_or_else(|| bad("matrix needs `re`"))?, "re")?;
    let im = match v.get("im") {
        Some(x) => Some(real_rows(x, "im")?),
        None => None,
    };
    let rows = re.len();
    let cols = re.first().map_or(0, |r| r.len());
    for (i, r) in re.iter().enumerate() {
        if r.len() != cols {
            return Err(bad(format!("`re` row {i} has length {} (expected {cols})", r.len())));
        }
    }
    if let Some(im) = &im {
        if im.len() != rows {
            return Err(bad(format!("`im` has {} rows (expected {rows})", im.len())));
        }
        for (i, r) in im.iter().enumerate() {
            if r.len() != cols {
                return Err(bad(format!("`im` row {i} has length {} (expected {cols})", r.len())));
            }
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        C64::new(re[i][j], im.as_ref().map_or(0.0, |m| m[i][j]))
    }))
}

/// Splits `name(a, b)` into the name and its numeric arguments.
fn split_call(s: &str) -> Result<(String, Vec<f64>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s.to_string(), Vec::new())),
        Some(p) => {
            let inner = s[p + 1..]
                .strip_suffix(')')
                .ok_or_else(|| bad(format!("unbalanced builder call `{s}`")))?;
            let args = inner
                .split(',')
                .filter(|a| !a.trim().is_empty())
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("bad argument `{a}` in `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((s[..p].trim().to_string(), args))
        }
    }
}

fn as_count(x: f64, what: &str) -> Result<usize> {
    if x < 0.0 || x.fract() != 0.0 {
        return Err(bad(format!("`{what}` must be a non-negative integer")));
    }
    Ok(x as usize)
}

fn parse_builder(spec: &Value) -> Result<Builder> {
    let (name, args, params) = match spec {
        Value::String(s) => {
            let (n, a) = split_call(s)?;
            (n, a, Value::Null)
        }
        Value::Object(o) => {
            let s = o
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("builder object needs a `name`"))?;
            let (n, a) = split_call(s)?;
            (n, a, o.get("params").cloned().unwrap_or(Value::Null))
        }
        _ => return Err(bad("`builder` must be a string or an object")),
    };
    let arg = |i: usize| args.get(i).copied();
    let p = &params;
    Ok(match name.as_str() {
        "identity" => Builder::Identity {
            modes: get_usize(p, "modes")?.or(arg(0).map(|x| x as usize)).unwrap_or(1),
        },
        "shift" => Builder::Shift {
            domain_modes: get_usize(p, "domain_modes")?
                .or(arg(0).map(|x| x as usize))
                .unwrap_or(3),
            steps: get_usize(p, "steps")?.or(arg(1).map(|x| x as usize)).unwrap_or(1),
            species: get_usize(p, "species")?.or(arg(2).map(|x| x as usize)).unwrap_or(1),
        },
        "flip" => Builder::Flip {
            modes: get_usize(p, "modes")?.or(arg(0).map(|x| x as usize)).unwrap_or(3),
            flipped: match p.get("flipped") {
                Some(x) => usize_list(x, "flipped")?,
                None => vec![0],
            },
        },
        "bogoliubov" => Builder::Bogoliubov {
            theta: get_f64(p, "theta")?
                .or(arg(0))
                .ok_or_else(|| bad("bogoliubov needs `theta`"))?,
        },
        "squeeze" => Builder::Squeeze {
            r: get_f64(p, "r")?.or(arg(0)).ok_or_else(|| bad("squeeze needs `r`"))?,
            two_mode: p.get("two_mode").and_then(Value::as_bool).unwrap_or(false),
        },
        "sea-shift" => Builder::SeaShift {
            w: get_usize(p, "w")?.or(arg(0).map(|x| x as usize)).unwrap_or(2),
        },
        "permutation" => Builder::Permutation {
            perm: usize_list(p.get("perm").ok_or_else(|| bad("permutation needs `perm`"))?, "perm")?,
        },
        "dirac-v" => {
            let w = match get_usize(p, "W")? {
                Some(w) => w,
                None => as_count(arg(0).ok_or_else(|| bad("dirac-v needs `W`"))?, "W")?,
            };
            let m_loc = match get_usize(p, "M_loc")? {
                Some(m) => m,
                None => match arg(1) {
                    Some(m) => as_count(m, "M_loc")?,
                    None => w / 4,
                },
            };
            Builder::DiracV { w, m_loc }
        }
        other => return Err(bad(format!("unknown builder `{other}`"))),
    })
}

fn parse_gauge(g: &Value) -> Result<GaugeSpec> {
    let group = g
        .get("group")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("gauge block needs `group`"))?;
    let n = get_usize(g, "n")?;
    let tag = match group {
        "U1" => GroupTag::U1,
        "Z2" => GroupTag::Z2,
        "UN" => GroupTag::UN(n.ok_or_else(|| bad("UN needs `n`"))?),
        "SUN" => GroupTag::SUN(n.ok_or_else(|| bad("SUN needs `n`"))?),
        "custom" => GroupTag::Custom,
        other => return Err(bad(format!("unknown group `{other}`"))),
    };
    let charges = |key: &str| -> Result<Vec<ModeAction>> {
        Ok(match g.get(key) {
            Some(x) => i32_list(x, key)?.into_iter().map(ModeAction::Charge).collect(),
            None => Vec::new(),
        })
    };
    let mut action = GaugeAction {
        group: tag.clone(),
        domain: charges("charges_domain")?,
        codomain: charges("charges_codomain")?,
        custom: Vec::new(),
    };
    if let GroupTag::UN(k) | GroupTag::SUN(k) = tag {
        if let (Some(sd), Some(sc)) = (get_usize(g, "sites_domain")?, get_usize(g, "sites_codomain")?) {
            action = GaugeAction::fundamental(k, sd, sc, matches!(tag, GroupTag::SUN(_)));
        }
    }
    if tag == GroupTag::Custom {
        let list = g
            .get("elements")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("custom gauge needs `elements`"))?;
        for e in list {
            let d = parse_matrix(e.get("domain").ok_or_else(|| bad("custom element needs `domain`"))?)?;
            let c = parse_matrix(
                e.get("codomain")
                    .ok_or_else(|| bad("custom element needs `codomain`"))?,
            )?;
            action.custom.push((d, c));
        }
    }
    Ok(GaugeSpec {
        action,
        sample_size: get_usize(g, "sample_size")?.unwrap_or(crate::gauge::DEFAULT_SAMPLES),
        seed: g.get("seed").and_then(Value::as_u64),
    })
}

impl Model {
    pub fn parse(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| bad(format!("not valid JSON: {e}")))?;
        let space = root.get("space");
        let labels = match space.and_then(|s| s.get("labels")) {
            Some(Value::Array(a)) => Some(
                a.iter()
                    .map(|x| {
                        x.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| bad("labels must be strings"))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            Some(_) => return Err(bad("`labels` must be an array")),
            None => None,
        };
        let iso = root.get("isometry").ok_or_else(|| bad("model needs an `isometry`"))?;
        let isometry = if let Some(b) = iso.get("builder") {
            Isometry::Named(parse_builder(b)?)
        } else if let Some(m) = iso.get("matrix") {
            let m = parse_matrix(m)?;
            let (r, c) = m.shape();
            if r % 2 != 0 || c % 2 != 0 {
                return Err(bad(format!("matrix is {r}x{c}; both sides must be even")));
            }
            let (nc, nd) = (r / 2, c / 2);
            if let Some(s) = space {
                for (key, expect) in [("domain_modes", nd), ("codomain_modes", nc)] {
                    if let Some(x) = get_usize(s, key)? {
                        if x != expect {
                            return Err(bad(format!("`{key}` = {x} but the matrix implies {expect}")));
                        }
                    }
                }
            }
            Isometry::Dense(BlockOperator::new(SelfDualSpace::new(nd), SelfDualSpace::new(nc), m)?)
        } else {
            return Err(bad("isometry needs `builder` or `matrix`"));
        };
        let algebra = match root.get("algebra") {
            None | Some(Value::Null) => None,
            Some(v) => Some(AlgebraTag::deserialize(v).map_err(|_| bad("`algebra` must be \"car\" or \"ccr\""))?),
        };
        let gauge = match root.get("gauge") {
            None | Some(Value::Null) => None,
            Some(g) => Some(parse_gauge(g)?),
        };
        Ok(Self {
            labels,
            isometry,
            algebra,
            gauge,
        })
    }

    pub fn builder(&self) -> Option<&Builder> {
        match &self.isometry {
            Isometry::Named(b) => Some(b),
            Isometry::Dense(_) => None,
        }
    }
}

/// Materializes an isometry; `dirac-v` has no finite self-dual form here.
pub fn realize(iso: &Isometry) -> Result<Realized> {
    let plain = |v| Ok(Realized { v, charges: None });
    match iso {
        Isometry::Dense(v) => plain(v.clone()),
        Isometry::Named(b) => match b {
            Builder::Identity { modes } => plain(builders::identity(*modes)),
            Builder::Shift {
                domain_modes,
                steps,
                species,
            } => {
                if *species == 0 {
                    return Err(bad("shift needs at least one species"));
                }
                plain(builders::shift(*domain_modes, *steps, *species))
            }
            Builder::Flip { modes, flipped } => {
                if let Some(&bad_mode) = flipped.iter().find(|&&m| m >= *modes) {
                    return Err(bad(format!("flipped mode {bad_mode} out of range")));
                }
                plain(builders::flip(*modes, flipped))
            }
            Builder::Bogoliubov { theta } => plain(builders::bogoliubov(*theta)),
            Builder::Squeeze { r, two_mode } => plain(builders::squeeze(*r, *two_mode)),
            Builder::SeaShift { w } => {
                if *w == 0 {
                    return Err(bad("sea-shift needs w >= 1"));
                }
                let s = builders::sea_shift(*w);
                Ok(Realized {
                    v: s.v,
                    charges: Some((s.charges_domain, s.charges_codomain)),
                })
            }
            Builder::Permutation { perm } => {
                let mut seen = vec![false; perm.len()];
                for &p in perm {
                    if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                        return Err(bad("`perm` is not a permutation"));
                    }
                }
                plain(builders::permutation(perm))
            }
            Builder::DiracV { .. } => Err(bad("dirac-v is analyzed by the circle pipeline")),
        },
    }
}

/// Fills in default mode actions: builder charges, else charge one everywhere.
pub fn complete_gauge(spec: &GaugeSpec, realized: &Realized) -> Result<GaugeAction> {
    let mut action = spec.action.clone();
    if action.group == GroupTag::Custom {
        return Ok(action);
    }
    let (nd, nc) = (realized.v.domain().n1(), realized.v.codomain().n1());
    if action.domain.is_empty() && action.codomain.is_empty() {
        let (qd, qc) = realized.charges.clone().unwrap_or((vec![1; nd], vec![1; nc]));
        action.domain = qd.into_iter().map(ModeAction::Charge).collect();
        action.codomain = qc.into_iter().map(ModeAction::Charge).collect();
    }
    if action.domain.len() != nd || action.codomain.len() != nc {
        return Err(Error::DimensionMismatch {
            what: "gauge mode assignment",
            expected: nd.max(nc),
            found: if action.domain.len() != nd {
                action.domain.len()
            } else {
                action.codomain.len()
            },
        });
    }
    Ok(action)
}
