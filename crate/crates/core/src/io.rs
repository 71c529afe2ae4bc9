//! File formats: model and graph JSON, distribution CSV, and the `#` header
//! line every output file starts with.
//!
//! All readers skip leading lines that start with `#`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{FunctionalModel, Gate, GateSpec, Measurement, SicSource, UnitarySource, Wire};
use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::linalg::{c, CMatrix};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Text after any leading `#` lines.
pub fn strip_header(text: &str) -> &str {
    let mut rest = text;
    while rest.starts_with('#') {
        rest = match rest.find('\n') {
            Some(i) => &rest[i + 1..],
            None => "",
        };
    }
    rest
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        write!(s, "{b:02x}").expect("writing to a String cannot fail");
    }
    s
}

/// `# qcm <version> inputs: name=sha256:<hex> ... [seed=<n>] [k=v ...]`
pub fn header_line(inputs: &[(&str, &[u8])], params: &[(&str, String)]) -> String {
    let mut line = format!("# qcm {VERSION} inputs:");
    if inputs.is_empty() {
        line.push_str(" none");
    }
    for (name, bytes) in inputs {
        write!(line, " {name}=sha256:{}", sha256_hex(bytes)).expect("infallible");
    }
    for (k, v) in params {
        write!(line, " {k}={v}").expect("infallible");
    }
    line.push('\n');
    line
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    wires: Vec<WireFile>,
    gates: Vec<GateFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireFile {
    id: String,
    dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum GateFile {
    Unitary(UnitaryFile),
    Measure(MeasureFile),
    Prepare(PrepareFile),
    Discard { wire: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryFile {
    wires: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    haar_random: Option<u64>,
    #[serde(default, skip_serializing_if = "is_false")]
    adjoint: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    node: String,
    wire: String,
    sic: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrepareFile {
    node: String,
    wire: String,
    sic: String,
    /// 1-based
    outcome: usize,
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(strip_header(text)).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize infallibly");
    s.push('\n');
    s
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("unitary matrix must be square and nonempty".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn measurement(node: String, wire: String, sic: &str, base_dir: Option<&Path>) -> Result<Measurement> {
    let source = SicSource::from_label(sic);
    let povm = source.load(base_dir)?;
    Ok(Measurement::new(node, wire, source, povm))
}

/// Parses a model file. Relative fiducial paths resolve against `base_dir`.
pub fn model_from_json(text: &str, base_dir: Option<&Path>) -> Result<FunctionalModel> {
    let file: ModelFile = parse_json(text, "model")?;
    let wires = file.wires.into_iter().map(|w| Wire::new(w.id, w.dim)).collect();
    let gates = file
        .gates
        .into_iter()
        .map(|g| {
            Ok(match g {
                GateFile::Unitary(u) => {
                    let source = match (u.matrix, u.haar_random) {
                        (Some(rows), None) => UnitarySource::Matrix(matrix_from_rows(&rows)?),
                        (None, Some(seed)) => UnitarySource::HaarRandom { seed },
                        _ => {
                            return Err(Error::Parse(
                                "unitary needs exactly one of `matrix` and `haar_random`".into(),
                            ))
                        }
                    };
                    GateSpec::Unitary {
                        wires: u.wires,
                        source,
                        adjoint: u.adjoint,
                    }
                }
                GateFile::Measure(m) => GateSpec::Measure(measurement(m.node, m.wire, &m.sic, base_dir)?),
                GateFile::Prepare(p) => {
                    if p.outcome == 0 {
                        return Err(Error::Parse("prepare outcomes are 1-based".into()));
                    }
                    GateSpec::Prepare {
                        measurement: measurement(p.node, p.wire, &p.sic, base_dir)?,
                        outcome: p.outcome - 1,
                    }
                }
                GateFile::Discard { wire } => GateSpec::Discard { wire },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FunctionalModel::new(wires, gates)
}

pub fn model_to_json(model: &FunctionalModel) -> String {
    let file = ModelFile {
        wires: model
            .wires()
            .iter()
            .map(|w| WireFile {
                id: w.id.clone(),
                dim: w.dim,
            })
            .collect(),
        gates: model
            .gates()
            .iter()
            .map(|g| match g {
                Gate::Unitary(u) => {
                    let (matrix, haar_random) = match u.source() {
                        UnitarySource::Matrix(m) => (Some(matrix_to_rows(m)), None),
                        UnitarySource::HaarRandom { seed } => (None, Some(*seed)),
                    };
                    GateFile::Unitary(UnitaryFile {
                        wires: u.wires().to_vec(),
                        matrix,
                        haar_random,
                        adjoint: u.adjoint(),
                    })
                }
                Gate::Measure(m) => GateFile::Measure(MeasureFile {
                    node: m.node.clone(),
                    wire: m.wire.clone(),
                    sic: m.sic.label(),
                }),
                Gate::Prepare { measurement, outcome } => GateFile::Prepare(PrepareFile {
                    node: measurement.node.clone(),
                    wire: measurement.wire.clone(),
                    sic: measurement.sic.label(),
                    outcome: outcome + 1,
                }),
                Gate::Discard { wire } => GateFile::Discard { wire: wire.clone() },
            })
            .collect(),
    };
    to_pretty(&file)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    nodes: Vec<(String, usize)>,
    edges: Vec<(String, String)>,
}

pub fn graph_from_json(text: &str) -> Result<CausalGraph> {
    let file: GraphFile = parse_json(text, "graph")?;
    CausalGraph::new(file.nodes, file.edges)
}

/// Nodes in graph order, edges sorted by (parent, child) name, one list per line.
pub fn graph_to_json(g: &CausalGraph) -> String {
    let nodes: Vec<(String, usize)> = g.nodes().iter().map(|n| (n.name.clone(), n.dim)).collect();
    let edges: Vec<(String, String)> = g.edge_names().into_iter().collect();
    format!(
        "{{\n  \"nodes\": {},\n  \"edges\": {}\n}}\n",
        serde_json::to_string(&nodes).expect("infallible"),
        serde_json::to_string(&edges).expect("infallible")
    )
}

pub fn load_model(path: &Path) -> Result<FunctionalModel> {
    model_from_json(&read_file(path)?, path.parent())
}

pub fn load_graph(path: &Path) -> Result<CausalGraph> {
    graph_from_json(&read_file(path)?)
}

pub fn load_distribution(path: &Path) -> Result<JointDistribution> {
    JointDistribution::from_csv(&read_file(path)?)
}

/// Pretty JSON for reports.
pub fn report_json<T: Serialize>(value: &T) -> String {
    to_pretty(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random_model;
    use crate::linalg::haar_unitary;

    const CHAIN2: &str = r#"{
  "wires": [{"id": "q", "dim": 2}],
  "gates": [
    {"measure": {"node": "Z", "wire": "q", "sic": "sic2"}},
    {"measure": {"node": "D", "wire": "q", "sic": "sic2"}}
  ]
}"#;

    #[test]
    fn header_is_skipped() {
        let text = format!("{}# another\n{CHAIN2}", header_line(&[("model", b"x")], &[]));
        let m = model_from_json(&text, None).unwrap();
        assert_eq!(m.node_names(), vec!["Z", "D"]);
        assert_eq!(strip_header("# only"), "");
    }

    #[test]
    fn header_format() {
        let h = header_line(&[("model", b"abc")], &[("seed", "7".into())]);
        assert_eq!(
            h,
            format!(
                "# qcm {VERSION} inputs: model=sha256:\
                 ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad seed=7\n"
            )
        );
    }

    #[test]
    fn model_round_trip_is_exact() {
        let t = CausalGraph::new(
            vec![("A".into(), 2), ("B".into(), 2), ("C".into(), 2)],
            vec![("C".into(), "A".into()), ("C".into(), "B".into())],
        )
        .unwrap();
        let m = random_model(&t, 3).unwrap();
        let intervened = m.apply_intervention_surgery("A", 2).unwrap();
        let with_matrix = FunctionalModel::new(
            vec![Wire::new("q", 2), Wire::new("r", 2)],
            vec![
                GateSpec::Unitary {
                    wires: vec!["q".into(), "r".into()],
                    source: UnitarySource::Matrix(haar_unitary(4, 5)),
                    adjoint: true,
                },
                GateSpec::Measure(Measurement::builtin("X", "q", 2).unwrap()),
            ],
        )
        .unwrap();
        for model in [m, intervened, with_matrix] {
            let text = model_to_json(&model);
            let back = model_from_json(&text, None).unwrap();
            assert_eq!(back, model);
            assert_eq!(model_to_json(&back), text);
            for (a, b) in model.gates().iter().zip(back.gates()) {
                if let (Gate::Unitary(a), Gate::Unitary(b)) = (a, b) {
                    assert_eq!(a.matrix(), b.matrix());
                }
            }
        }
    }

    #[test]
    fn graph_round_trip() {
        let text = r#"{"nodes": [["A", 2], ["B", 3]], "edges": [["A", "B"]]}"#;
        let g = graph_from_json(text).unwrap();
        let out = graph_to_json(&g);
        assert_eq!(graph_from_json(&out).unwrap(), g);
        assert_eq!(graph_to_json(&graph_from_json(&out).unwrap()), out);
    }

    #[test]
    fn malformed_inputs_are_parse_errors() {
        let unknown = r#"{"wires": [], "gates": [], "extra": 1}"#;
        assert!(matches!(model_from_json(unknown, None), Err(Error::Parse(_))));
        let both = r#"{"wires": [{"id": "q", "dim": 2}],
            "gates": [{"unitary": {"wires": ["q"], "haar_random": 1, "matrix": [[[1,0],[0,0]],[[0,0],[1,0]]]}}]}"#;
        assert!(matches!(model_from_json(both, None), Err(Error::Parse(_))));
        let zero = r#"{"wires": [{"id": "q", "dim": 2}],
            "gates": [{"discard": {"wire": "q"}}, {"prepare": {"node": "W", "wire": "q", "sic": "sic2", "outcome": 0}}]}"#;
        assert!(matches!(model_from_json(zero, None), Err(Error::Parse(_))));
        assert!(matches!(graph_from_json("{nodes: []}"), Err(Error::Parse(_))));
    }

    #[test]
    fn fiducial_paths_resolve_against_model_directory() {
        let dir = tempfile::tempdir().unwrap();
        let fid = crate::sic::known_fiducial(2).unwrap();
        std::fs::write(dir.path().join("f2.txt"), fid.to_text()).unwrap();
        let text = r#"{"wires": [{"id": "q", "dim": 2}],
            "gates": [{"measure": {"node": "X", "wire": "q", "sic": "f2.txt"}}]}"#;
        std::fs::write(dir.path().join("m.json"), text).unwrap();
        let m = load_model(&dir.path().join("m.json")).unwrap();
        let p = crate::circuit::simulate(&m).unwrap();
        assert!(p.probabilities().iter().all(|&x| (x - 0.25).abs() < 1e-12));
    }
}
