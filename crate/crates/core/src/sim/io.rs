use std::fs::{self, OpenOptions};
use std::io::{Read, Write};
use std::path::Path;

use super::{RunRecord, SimConfig};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "scheme,rate,mod,snr_db,frames,frame_errors,bit_errors,fer,ber,fer_ci_lo,fer_ci_hi";

fn rows(records: &[RunRecord]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes a fresh CSV (header plus rows). The file is assembled next to
/// `path` and renamed into place, so a failure never leaves a torn file.
pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut buf = format!("{CSV_HEADER}\n").into_bytes();
    buf.extend(rows(records)?);
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    fs::write(&tmp, &buf)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Appends rows, writing the header first if the file is new or empty.
/// An existing file with a different header is refused.
pub fn append_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let existing = match fs::File::open(path) {
        Ok(mut f) => {
            let mut s = String::new();
            f.read_to_string(&mut s)?;
            Some(s)
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let mut buf = Vec::new();
    match existing.as_deref() {
        None | Some("") => buf.extend(format!("{CSV_HEADER}\n").into_bytes()),
        Some(s) => {
            if s.lines().next() != Some(CSV_HEADER) {
                return Err(Error::Config(format!(
                    "{} has a different header; refusing to append",
                    path.display()
                )));
            }
            if !s.ends_with('\n') {
                buf.push(b'\n');
            }
        }
    }
    buf.extend(rows(records)?);
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<RunRecord>> {
    if text.lines().next() != Some(CSV_HEADER) {
        return Err(Error::Config("CSV header does not match".into()));
    }
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Companion JSON with the full configuration.
pub fn write_config(path: &Path, cfg: &SimConfig) -> Result<()> {
    let mut s = serde_json::to_string_pretty(cfg)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_config(path: &Path) -> Result<SimConfig> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Modulation;
    use crate::stbc::SchemeId;
    use crate::turbo::CodeRate;

    fn rec(snr: f64) -> RunRecord {
        RunRecord {
            scheme: SchemeId::AlamoutiCdd,
            rate: CodeRate::EightNinths,
            modulation: Modulation::Qam16,
            snr_db: snr,
            frames: 123,
            frame_errors: 7,
            bit_errors: 99,
            fer: 7.0 / 123.0,
            ber: 99.0 / (123.0 * 1056.0),
            fer_ci_lo: 0.1 / 3.0,
            fer_ci_hi: 0.2 / 7.0,
            wall_seconds: 1.5,
        }
    }

    #[test]
    fn empty_is_header_only() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("a.csv");
        write_records(&p, &[]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn round_trip() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("a.csv");
        let recs = vec![rec(0.1), rec(-2.5), rec(f64::INFINITY)];
        write_records(&p, &recs).unwrap();
        assert_eq!(parse_csv(&fs::read_to_string(&p).unwrap()).unwrap(), recs);
    }

    #[test]
    fn append_is_resumable() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("a.csv");
        append_records(&p, &[rec(1.0)]).unwrap();
        append_records(&p, &[rec(2.0), rec(3.0)]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.matches("scheme,").count(), 1);
        assert_eq!(parse_csv(&text).unwrap(), vec![rec(1.0), rec(2.0), rec(3.0)]);
        fs::write(&p, "other,header\n").unwrap();
        assert!(append_records(&p, &[rec(1.0)]).is_err());
        assert_eq!(fs::read_to_string(&p).unwrap(), "other,header\n");
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("missing").join("a.csv");
        assert!(matches!(write_records(&p, &[rec(0.0)]), Err(Error::Io(_))));
        assert!(matches!(append_records(&p, &[rec(0.0)]), Err(Error::Io(_))));
    }

    #[test]
    fn config_json_round_trip() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("c.json");
        let mut c = SimConfig::new(SchemeId::Qostbc, CodeRate::Half, vec![0.0, 1.0]);
        c.detector = Some(crate::detect::DetectorKind::Lmmse);
        c.channel = crate::channel::ChannelSpec::File("x.txt".into());
        write_config(&p, &c).unwrap();
        assert_eq!(read_config(&p).unwrap(), c);
    }
}
