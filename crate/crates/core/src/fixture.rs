//! TOML fixture files: curves with labelled points, and module files that
//! build a [`GlobalModule`] plus the parameters of each experiment.
//!
//! Curve file:
//!
//! ```toml
//! name = "rank3"
//! a = [0, 0, 1, -7, 6]          # a1 a2 a3 a4 a6, integers or "n/d"
//!
//! [[points]]
//! label = "P1"
//! x = "1"
//! y = "0"
//!
//! [[points]]
//! label = "T"
//! x = "2"
//! y = "3"
//! order = 6                      # claimed torsion order, checked exactly
//! ```
//!
//! Module file: either `curve = "path"` (relative to the module file) with
//! `generators` and `torsion` label lists, or a `[synthetic]` table. Then
//! optional `[counterexample]`, `[dynamics]`, `[scan]`, `[axioms]` and
//! `[caps]` sections. Points are written as free-coordinate arrays
//! `[1, 0, 0]` or as tables `{ free = [1, 0], torsion = [3] }`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;

use crate::dynamics::EndoMap;
use crate::ec::{parse_rational, QCurve, QPoint};
use crate::error::{Error, Result};
use crate::finite_abelian::FiniteAbelianGroup;
use crate::reduction::{Caps, GlobalModule, GlobalPoint, SyntheticPlace, DEFAULT_INDEPENDENCE_BOX};
use crate::zmodule::IntMatrix;

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    fn to_rational(&self) -> Result<BigRational> {
        match self {
            Num::Int(n) => Ok(BigRational::from_integer(BigInt::from(*n))),
            Num::Text(s) => parse_rational(s),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    name: Option<String>,
    description: Option<String>,
    a: [Num; 5],
    #[serde(default)]
    points: Vec<RawPoint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    label: String,
    x: Num,
    y: Num,
    order: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct LabeledPoint {
    pub label: String,
    pub point: QPoint,
    pub order: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct CurveFixture {
    pub name: String,
    pub description: Option<String>,
    pub curve: QCurve,
    pub points: Vec<LabeledPoint>,
}

impl CurveFixture {
    pub fn point(&self, label: &str) -> Result<&LabeledPoint> {
        self.points
            .iter()
            .find(|p| p.label == label)
            .ok_or_else(|| Error::fixture(format!("no point labelled {label:?}")))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::fixture(format!("{}: {e}", path.display())))
}

pub fn load_curve(path: &Path) -> Result<CurveFixture> {
    parse_curve(&read(path)?, path)
}

pub fn parse_curve(text: &str, path: &Path) -> Result<CurveFixture> {
    let raw: RawCurve = parse_toml(text, path)?;
    let ctx = |e: Error| Error::fixture(format!("{}: {e}", path.display()));
    let a = [
        raw.a[0].to_rational().map_err(ctx)?,
        raw.a[1].to_rational().map_err(ctx)?,
        raw.a[2].to_rational().map_err(ctx)?,
        raw.a[3].to_rational().map_err(ctx)?,
        raw.a[4].to_rational().map_err(ctx)?,
    ];
    let curve = QCurve::from_rationals(a).map_err(ctx)?;
    let mut points = Vec::new();
    for p in raw.points {
        if points.iter().any(|q: &LabeledPoint| q.label == p.label) {
            return Err(Error::fixture(format!("duplicate point label {:?}", p.label)));
        }
        let point = QPoint::Affine(p.x.to_rational().map_err(ctx)?, p.y.to_rational().map_err(ctx)?);
        if !curve.contains(&point) {
            return Err(Error::fixture(format!(
                "point {} = {point} is not on the curve",
                p.label
            )));
        }
        points.push(LabeledPoint {
            label: p.label,
            point,
            order: p.order,
        });
    }
    Ok(CurveFixture {
        name: raw.name.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        }),
        description: raw.description,
        curve,
        points,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModule {
    curve: Option<PathBuf>,
    #[serde(default)]
    generators: Vec<String>,
    #[serde(default)]
    torsion: Vec<String>,
    synthetic: Option<RawSynthetic>,
    independence_box: Option<u32>,
    counterexample: Option<RawCounterexample>,
    dynamics: Option<RawDynamics>,
    scan: Option<RawScan>,
    axioms: Option<RawAxioms>,
    caps: Option<RawCaps>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSynthetic {
    rank: usize,
    #[serde(default)]
    torsion: Vec<u64>,
    d: Option<usize>,
    #[serde(default)]
    places: Vec<RawSyntheticPlace>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSyntheticPlace {
    p: u64,
    group: Vec<u64>,
    generators: Vec<Vec<u64>>,
    #[serde(default)]
    torsion: Vec<Vec<u64>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGlobalPoint {
    Free(Vec<i64>),
    Full {
        free: Vec<i64>,
        #[serde(default)]
        torsion: Vec<u64>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCounterexample {
    points: Vec<RawGlobalPoint>,
    place_bound: Option<u64>,
    l: Option<u64>,
    n: Option<i64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawMap {
    Scalar(i64),
    Matrix(Vec<Vec<i64>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    map: RawMap,
    point: RawGlobalPoint,
    #[serde(default)]
    lambda: Vec<RawGlobalPoint>,
    place_bound: Option<u64>,
    step_bound: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    points: Vec<RawGlobalPoint>,
    l: Option<u64>,
    pattern: Option<Vec<u32>>,
    place_bound: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxioms {
    place_bound: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCaps {
    point_count: Option<u64>,
    subgroup: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct CounterexampleSection {
    pub points: Vec<GlobalPoint>,
    pub place_bound: Option<u64>,
    pub l: Option<u64>,
    pub n: Option<i64>,
}

#[derive(Clone, Debug)]
pub struct DynamicsSection {
    pub map: EndoMap,
    pub point: GlobalPoint,
    pub lambda: Vec<GlobalPoint>,
    pub place_bound: Option<u64>,
    pub step_bound: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ScanSection {
    pub points: Vec<GlobalPoint>,
    pub l: Option<u64>,
    pub pattern: Option<Vec<u32>>,
    pub place_bound: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct ModuleFixture {
    pub path: PathBuf,
    pub module: GlobalModule,
    /// Name of the underlying curve fixture, if any.
    pub curve_name: Option<String>,
    pub independence_box: u32,
    pub counterexample: Option<CounterexampleSection>,
    pub dynamics: Option<DynamicsSection>,
    pub scan: Option<ScanSection>,
    pub axioms_place_bound: Option<u64>,
    pub caps: Caps,
}

pub fn load_module(path: &Path) -> Result<ModuleFixture> {
    parse_module(&read(path)?, path)
}

/// Parses a module file; `path` locates relative curve references.
pub fn parse_module(text: &str, path: &Path) -> Result<ModuleFixture> {
    let raw: RawModule = parse_toml(text, path)?;
    let (module, curve_name) = match (&raw.curve, raw.synthetic) {
        (Some(_), Some(_)) => return Err(Error::fixture("give either `curve` or `[synthetic]`, not both")),
        (None, None) => return Err(Error::fixture("module needs `curve` or `[synthetic]`")),
        (Some(rel), None) => {
            let base = path.parent().unwrap_or(Path::new("."));
            let cf = load_curve(&base.join(rel))?;
            let gens = raw
                .generators
                .iter()
                .map(|l| cf.point(l).map(|p| p.point.clone()))
                .collect::<Result<Vec<_>>>()?;
            let torsion = raw
                .torsion
                .iter()
                .map(|l| {
                    let p = cf.point(l)?;
                    let ord = p
                        .order
                        .ok_or_else(|| Error::fixture(format!("torsion point {l} has no claimed order")))?;
                    Ok((p.point.clone(), ord))
                })
                .collect::<Result<Vec<_>>>()?;
            let name = cf.name.clone();
            (GlobalModule::from_curve(cf.curve, gens, torsion)?, Some(name))
        }
        (None, Some(s)) => {
            if !raw.generators.is_empty() || !raw.torsion.is_empty() {
                return Err(Error::fixture("synthetic modules take no generator labels"));
            }
            let tors = FiniteAbelianGroup::new(s.torsion).map_err(|e| Error::fixture(e.to_string()))?;
            let mut places = BTreeMap::new();
            for sp in s.places {
                let group =
                    FiniteAbelianGroup::new(sp.group).map_err(|e| Error::fixture(format!("place {}: {e}", sp.p)))?;
                let el = |c: Vec<u64>| {
                    group
                        .element(c)
                        .map_err(|e| Error::fixture(format!("place {}: {e}", sp.p)))
                };
                let generators = sp.generators.into_iter().map(el).collect::<Result<Vec<_>>>()?;
                let torsion = sp.torsion.into_iter().map(el).collect::<Result<Vec<_>>>()?;
                if places
                    .insert(
                        sp.p,
                        SyntheticPlace {
                            group,
                            generators,
                            torsion,
                        },
                    )
                    .is_some()
                {
                    return Err(Error::fixture(format!("place {} listed twice", sp.p)));
                }
            }
            (GlobalModule::synthetic(s.rank, tors, s.d.unwrap_or(2), places)?, None)
        }
    };

    let point = |p: RawGlobalPoint| -> Result<GlobalPoint> {
        let (free, torsion) = match p {
            RawGlobalPoint::Free(f) => (f, vec![0; module.torsion_group().rank()]),
            RawGlobalPoint::Full { free, torsion } if torsion.is_empty() => {
                (free, vec![0; module.torsion_group().rank()])
            }
            RawGlobalPoint::Full { free, torsion } => (free, torsion),
        };
        module
            .point(free.into_iter().map(BigInt::from).collect(), torsion)
            .map_err(|e| Error::fixture(e.to_string()))
    };
    let points = |ps: Vec<RawGlobalPoint>| ps.into_iter().map(point).collect::<Result<Vec<_>>>();

    let counterexample = raw
        .counterexample
        .map(|c| {
            Ok::<_, Error>(CounterexampleSection {
                points: points(c.points)?,
                place_bound: c.place_bound,
                l: c.l,
                n: c.n,
            })
        })
        .transpose()?;
    let dynamics = raw
        .dynamics
        .map(|d| {
            let map = match d.map {
                RawMap::Scalar(m) => EndoMap::scalar(m),
                RawMap::Matrix(rows) => EndoMap::matrix(&module, IntMatrix::from_rows(&rows)),
            }
            .map_err(|e| Error::fixture(e.to_string()))?;
            Ok::<_, Error>(DynamicsSection {
                map,
                point: point(d.point)?,
                lambda: points(d.lambda)?,
                place_bound: d.place_bound,
                step_bound: d.step_bound,
            })
        })
        .transpose()?;
    let scan = raw
        .scan
        .map(|s| {
            Ok::<_, Error>(ScanSection {
                points: points(s.points)?,
                l: s.l,
                pattern: s.pattern,
                place_bound: s.place_bound,
            })
        })
        .transpose()?;
    let mut caps = Caps::default();
    if let Some(c) = raw.caps {
        caps.point_count = c.point_count.unwrap_or(caps.point_count);
        caps.subgroup = c.subgroup.unwrap_or(caps.subgroup);
    }

    Ok(ModuleFixture {
        path: path.to_path_buf(),
        module,
        curve_name,
        independence_box: raw.independence_box.unwrap_or(DEFAULT_INDEPENDENCE_BOX),
        counterexample,
        dynamics,
        scan,
        axioms_place_bound: raw.axioms.and_then(|a| a.place_bound),
        caps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CURVE: &str = r#"
name = "rank3"
a = [0, 0, 1, -7, 6]

[[points]]
label = "P1"
x = "1"
y = "0"

[[points]]
label = "P2"
x = 2
y = 0
"#;

    fn with_curve(module: &str) -> Result<ModuleFixture> {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("c.toml"), CURVE).unwrap();
        let path = dir.path().join("m.toml");
        std::fs::write(&path, module).unwrap();
        load_module(&path)
    }

    #[test]
    fn curve_file_parses() {
        let c = parse_curve(CURVE, Path::new("c.toml")).unwrap();
        assert_eq!(c.name, "rank3");
        assert_eq!(c.points.len(), 2);
        assert!(c.point("P3").is_err());
    }

    #[test]
    fn off_curve_point_is_fixture_error() {
        let bad = CURVE.replace("y = 0\n", "y = 1\n");
        assert!(matches!(parse_curve(&bad, Path::new("c.toml")), Err(Error::Fixture(_))));
    }

    #[test]
    fn module_with_sections() {
        let m = with_curve(
            r#"
curve = "c.toml"
generators = ["P1", "P2"]

[counterexample]
points = [[1, 0], [0, 1]]
place_bound = 50

[dynamics]
map = 2
point = [1, 0]
lambda = [[0, 1]]

[scan]
points = [{ free = [1, 0] }]
l = 5
pattern = [1]
"#,
        )
        .unwrap();
        assert_eq!(m.module.rank(), 2);
        assert_eq!(m.counterexample.unwrap().points.len(), 2);
        assert_eq!(m.dynamics.unwrap().map, EndoMap::Scalar { m: 2 });
        assert_eq!(m.scan.unwrap().pattern, Some(vec![1]));
    }

    #[test]
    fn unknown_label_and_missing_file() {
        assert!(matches!(
            with_curve("curve = \"c.toml\"\ngenerators = [\"Q\"]\n"),
            Err(Error::Fixture(_))
        ));
        assert!(matches!(with_curve("curve = \"nope.toml\"\n"), Err(Error::Io { .. })));
        assert!(matches!(
            load_module(Path::new("/nonexistent/m.toml")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn synthetic_module() {
        let m = parse_module(
            r#"
[synthetic]
rank = 1
torsion = [2]

[[synthetic.places]]
p = 5
group = [4]
generators = [[1]]
torsion = [[2]]
"#,
            Path::new("s.toml"),
        )
        .unwrap();
        assert_eq!(m.module.good_places(100), vec![5]);
        assert!(m.module.torsion_injectivity_check(5, Caps::default()).unwrap());
    }
}
