//! Record and histogram file formats.
//!
//! A record is written as
//! `{ "window": [s, e], "tail": [s, e], "histograms": [ ..16 histograms.. ] }`.
//! For reading, a bare JSON array is also accepted: its histogram objects
//! plus one object carrying `"window"` (and optionally `"tail"` and
//! `"resample"`).

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::MeasurementSetting;

use super::{CoincidenceHistogram, TomographyRecord};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordMeta {
    window: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    resample: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RecordFile {
    #[serde(flatten)]
    meta: RecordMeta,
    histograms: Vec<CoincidenceHistogram>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ArrayItem {
    Histogram(CoincidenceHistogram),
    Meta(RecordMeta),
}

impl TomographyRecord {
    pub fn to_json_string(&self) -> Result<String> {
        let file = RecordFile {
            meta: RecordMeta {
                window: [self.window.0, self.window.1],
                tail: self.tail.map(|t| [t.0, t.1]),
                resample: self.resample.clone(),
            },
            histograms: self.histograms.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let (meta, histograms) = match value {
            serde_json::Value::Array(items) => {
                let mut meta = None;
                let mut hists = Vec::new();
                for (i, item) in items.into_iter().enumerate() {
                    let parsed: ArrayItem = serde_json::from_value(item).map_err(|e| {
                        Error::invalid(format!(
                            "record element {i} is neither a histogram nor a window object: {e}"
                        ))
                    })?;
                    match parsed {
                        ArrayItem::Histogram(h) => hists.push(h),
                        ArrayItem::Meta(m) if meta.is_none() => meta = Some(m),
                        ArrayItem::Meta(_) => {
                            return Err(Error::invalid("record has more than one window object"))
                        }
                    }
                }
                let meta = meta.ok_or_else(|| Error::invalid("record is missing the \"window\" object"))?;
                (meta, hists)
            }
            other => {
                let file: RecordFile = serde_json::from_value(other)?;
                (file.meta, file.histograms)
            }
        };
        let record = TomographyRecord::new(
            histograms,
            (meta.window[0], meta.window[1]),
            meta.tail.map(|t| (t[0], t[1])),
        )?;
        Ok(TomographyRecord {
            resample: meta.resample,
            ..record
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.to_json_string()?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

impl CoincidenceHistogram {
    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let h: CoincidenceHistogram = serde_json::from_str(&text)?;
        h.validate()?;
        Ok(h)
    }
}

/// Reads a two-column `bin_index,count` CSV. A non-numeric first row is
/// taken as a header. Every index in `0..n` must appear exactly once.
pub fn histogram_from_csv<R: Read>(
    reader: R,
    setting: MeasurementSetting,
    bin_width_ns: f64,
    env_per_bin: f64,
) -> Result<CoincidenceHistogram> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut pairs: Vec<(usize, u64)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::invalid(format!(
                "CSV row {}: expected 2 columns (bin_index,count), found {}",
                line + 1,
                rec.len()
            )));
        }
        let idx = rec[0].parse::<usize>();
        let count = rec[1].parse::<u64>();
        match (idx, count) {
            (Ok(i), Ok(c)) => pairs.push((i, c)),
            _ if line == 0 => continue,
            _ => {
                return Err(Error::invalid(format!(
                    "CSV row {}: cannot parse '{}', '{}' as bin index and count",
                    line + 1,
                    &rec[0],
                    &rec[1]
                )))
            }
        }
    }
    let n = pairs.len();
    let mut bins: Vec<Option<u64>> = vec![None; n];
    for (i, c) in pairs {
        let slot = bins
            .get_mut(i)
            .ok_or_else(|| Error::invalid(format!("CSV bin index {i} out of range 0..{n}")))?;
        if slot.replace(c).is_some() {
            return Err(Error::invalid(format!("CSV bin index {i} appears twice")));
        }
    }
    let bins: Vec<u64> = bins.into_iter().map(|b| b.expect("all indices filled")).collect();
    CoincidenceHistogram::new(setting, bin_width_ns, bins, env_per_bin)
}
