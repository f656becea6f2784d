//! Flat CSV datasets with a JSON metadata sidecar.
//!
//! The first line is `# glidernav-dataset v1`, then a header row with the
//! columns of [`COLUMNS`], then one row per sample. Floats are written in
//! the shortest form that parses back to the same value.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io::write_atomic;
use crate::dynamics::{ControlInput, RunLog, RunMeta};
use crate::error::{Error, Result};
use crate::frames::{EulerAngles, NedPosition};
use crate::sensors::SensorRecord;

pub const DATASET_MAGIC: &str = "# glidernav-dataset v1";
pub const DATASET_VERSION: u32 = 1;

pub const COLUMNS: [(&str, &str); 23] = [
    ("time_s", "s"),
    ("roll_rad", "rad"),
    ("pitch_rad", "rad"),
    ("yaw_rad", "rad"),
    ("p_rad_s", "rad/s"),
    ("q_rad_s", "rad/s"),
    ("r_rad_s", "rad/s"),
    ("ax_m_s2", "m/s^2"),
    ("ay_m_s2", "m/s^2"),
    ("az_m_s2", "m/s^2"),
    ("depth_m", "m"),
    ("heave_w_r_m_s", "m/s"),
    ("vbs_m3", "m^3"),
    ("mm_x_m", "m"),
    ("mm_roll_rad", "rad"),
    ("label_u_r_m_s", "m/s"),
    ("label_v_r_m_s", "m/s"),
    ("label_valid", "0/1"),
    ("truth_n_m", "m"),
    ("truth_e_m", "m"),
    ("truth_d_m", "m"),
    ("cur_u_m_s", "m/s"),
    ("cur_v_m_s", "m/s"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format: String,
    pub version: u32,
    pub columns: Vec<String>,
    pub units: Vec<String>,
    pub rows: usize,
    pub run: RunMeta,
}

impl DatasetMeta {
    pub fn new(run: RunMeta, rows: usize) -> Self {
        Self {
            format: "glidernav-dataset".into(),
            version: DATASET_VERSION,
            columns: COLUMNS.iter().map(|c| c.0.to_string()).collect(),
            units: COLUMNS.iter().map(|c| c.1.to_string()).collect(),
            rows,
            run,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub records: Vec<SensorRecord>,
}

impl Dataset {
    pub fn from_run(log: &RunLog) -> Self {
        Self {
            meta: DatasetMeta::new(log.meta.clone(), log.records.len()),
            records: log.records.clone(),
        }
    }

    /// Sample interval from the metadata.
    pub fn interval_s(&self) -> f64 {
        1.0 / self.meta.run.sample_rate_hz
    }
}

pub fn meta_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn record_to_row(r: &SensorRecord) -> [f64; 23] {
    [
        r.t,
        r.euler.phi,
        r.euler.theta,
        r.euler.psi,
        r.omega_meas[0],
        r.omega_meas[1],
        r.omega_meas[2],
        r.accel_meas[0],
        r.accel_meas[1],
        r.accel_meas[2],
        r.depth,
        r.depth_rate_heave,
        r.ctrl.vbs,
        r.ctrl.mm_x,
        r.ctrl.mm_roll,
        r.label_u_r,
        r.label_v_r,
        if r.label_valid { 1.0 } else { 0.0 },
        r.truth_pos.north,
        r.truth_pos.east,
        r.truth_pos.down,
        r.current[0],
        r.current[1],
    ]
}

pub fn row_to_record(v: &[f64; 23]) -> SensorRecord {
    SensorRecord {
        t: v[0],
        // stored angles are already wrapped; keep them bit-exact
        euler: EulerAngles {
            phi: v[1],
            theta: v[2],
            psi: v[3],
        },
        omega_meas: [v[4], v[5], v[6]],
        accel_meas: [v[7], v[8], v[9]],
        depth: v[10],
        depth_rate_heave: v[11],
        ctrl: ControlInput {
            vbs: v[12],
            mm_x: v[13],
            mm_roll: v[14],
        },
        label_u_r: v[15],
        label_v_r: v[16],
        label_valid: v[17] != 0.0,
        truth_pos: NedPosition::new(v[18], v[19], v[20]),
        current: [v[21], v[22]],
    }
}

/// Renders a CSV table with a magic comment line.
pub(crate) fn render_table(magic: &str, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(magic.as_bytes());
    out.push(b'\n');
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| format_float(*x)))?;
    }
    w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
}

pub(crate) fn format_float(x: f64) -> String {
    // shortest representation that parses back to the same bits
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_owned).unwrap_or(s)
}

/// Parses a table written by [`render_table`], checking magic and header.
pub(crate) fn parse_table(text: &str, magic: &str, header: &[&str], what: &Path) -> Result<Vec<Vec<f64>>> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    if first.trim_end() != magic {
        return Err(Error::SchemaMismatch(format!(
            "{}: expected first line {magic:?}, found {:?}",
            what.display(),
            first.trim_end()
        )));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_bytes());
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::SchemaMismatch(format!("{}: column header does not match", what.display())));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::SchemaMismatch(format!("{}: row {} has {} fields", what.display(), i + 1, rec.len())));
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::SchemaMismatch(format!("{}: row {}: bad number {f:?}", what.display(), i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn dataset_csv_bytes(records: &[SensorRecord]) -> Result<Vec<u8>> {
    let header: Vec<&str> = COLUMNS.iter().map(|c| c.0).collect();
    render_table(DATASET_MAGIC, &header, records.iter().map(|r| record_to_row(r).to_vec()))
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    write_atomic(path, &dataset_csv_bytes(&ds.records)?)?;
    let meta = serde_json::to_string_pretty(&ds.meta)?;
    write_atomic(&meta_path(path), meta.as_bytes())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: Vec<&str> = COLUMNS.iter().map(|c| c.0).collect();
    let rows = parse_table(&text, DATASET_MAGIC, &header, path)?;
    let records: Vec<SensorRecord> = rows
        .iter()
        .map(|r| row_to_record(r.as_slice().try_into().expect("row width checked")))
        .collect();
    if records.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::SchemaMismatch(format!("{}: timestamps not strictly increasing", path.display())));
    }
    let mp = meta_path(path);
    let mtext = std::fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
    let meta: DatasetMeta =
        serde_json::from_str(&mtext).map_err(|e| Error::SchemaMismatch(format!("{}: {e}", mp.display())))?;
    if meta.version != DATASET_VERSION || meta.columns != header {
        return Err(Error::SchemaMismatch(format!("{}: unsupported dataset metadata", mp.display())));
    }
    if meta.rows != records.len() {
        return Err(Error::SchemaMismatch(format!(
            "{}: metadata lists {} rows, file has {}",
            path.display(),
            meta.rows,
            records.len()
        )));
    }
    Ok(Dataset { meta, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(t: f64, x: f64) -> SensorRecord {
        SensorRecord {
            t,
            euler: EulerAngles {
                phi: x,
                theta: -x / 3.0,
                psi: 1.0 / 3.0,
            },
            omega_meas: [x, 2.0 * x, 1e-300],
            accel_meas: [-x, 0.1, 9.81],
            depth: 12.5,
            depth_rate_heave: -0.1,
            ctrl: ControlInput {
                vbs: -1e-3,
                mm_x: 0.02,
                mm_roll: 0.0,
            },
            label_u_r: 1.0 / 7.0,
            label_v_r: -0.0,
            label_valid: t > 0.0,
            truth_pos: NedPosition::new(x * 1e5, -x, 3.0),
            current: [-0.05, -0.002],
        }
    }

    #[test]
    fn header_lists_documented_columns() {
        let bytes = dataset_csv_bytes(&[record(0.0, 0.5)]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(DATASET_MAGIC));
        let header = lines.next().unwrap();
        assert!(header.starts_with("time_s,roll_rad,pitch_rad,yaw_rad,p_rad_s"));
        assert!(header.ends_with("truth_n_m,truth_e_m,truth_d_m,cur_u_m_s,cur_v_m_s"));
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5e-7, f64::MAX] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn bad_magic_and_header_are_schema_errors() {
        let p = Path::new("x.csv");
        let header = ["a", "b"];
        assert!(matches!(parse_table("# other v1\na,b\n", DATASET_MAGIC, &header, p), Err(Error::SchemaMismatch(_))));
        let t = format!("{DATASET_MAGIC}\na,c\n1,2\n");
        assert!(matches!(parse_table(&t, DATASET_MAGIC, &header, p), Err(Error::SchemaMismatch(_))));
        let t = format!("{DATASET_MAGIC}\na,b\n1,zz\n");
        assert!(matches!(parse_table(&t, DATASET_MAGIC, &header, p), Err(Error::SchemaMismatch(_))));
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_value_identical(xs in proptest::collection::vec(-1e6f64..1e6, 1..20)) {
            let recs: Vec<SensorRecord> = xs.iter().enumerate().map(|(i, x)| record(i as f64 * 0.5, *x)).collect();
            let bytes = dataset_csv_bytes(&recs).unwrap();
            let header: Vec<&str> = COLUMNS.iter().map(|c| c.0).collect();
            let rows = parse_table(std::str::from_utf8(&bytes).unwrap(), DATASET_MAGIC, &header, Path::new("m")).unwrap();
            let back: Vec<SensorRecord> = rows.iter().map(|r| row_to_record(r.as_slice().try_into().unwrap())).collect();
            for (a, b) in recs.iter().zip(&back) {
                prop_assert_eq!(record_to_row(a).map(f64::to_bits), record_to_row(b).map(f64::to_bits));
            }
        }
    }
}
