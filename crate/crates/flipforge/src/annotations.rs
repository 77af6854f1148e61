//! JSON annotation and detection files.

use std::fs;
use std::path::Path;

use flipforge_core::heatmap::Detection;
use flipforge_core::image::{AnnotationSet, MitosisEvent};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct AnnotationFile {
    #[serde(default)]
    sequence: String,
    events: Vec<MitosisEvent>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DetectionFile {
    detections: Vec<Detection>,
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_annotations(text: &str) -> std::result::Result<AnnotationSet, String> {
    let file: AnnotationFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    AnnotationSet::new(file.sequence, file.events).map_err(|e| e.to_string())
}

pub fn load_annotations(path: &Path) -> Result<AnnotationSet> {
    let file: AnnotationFile = read_json(path)?;
    Ok(AnnotationSet::new(file.sequence, file.events)?)
}

pub fn save_annotations(labels: &AnnotationSet, path: &Path) -> Result<()> {
    let file = AnnotationFile {
        sequence: labels.sequence_name().to_owned(),
        events: labels.events().to_vec(),
    };
    write_json(&file, path)
}

pub fn load_detections(path: &Path) -> Result<Vec<Detection>> {
    let file: DetectionFile = read_json(path)?;
    if let Some(d) = file.detections.iter().find(|d| !(0.0..=1.0).contains(&d.score)) {
        return Err(Error::Invalid(format!(
            "{}: detection score {} outside [0, 1]",
            path.display(),
            d.score
        )));
    }
    Ok(file.detections)
}

pub fn save_detections(detections: &[Detection], path: &Path) -> Result<()> {
    write_json(
        &DetectionFile {
            detections: detections.to_vec(),
        },
        path,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_events() {
        let a = parse_annotations(r#"{"events":[{"t":3,"x":10.5,"y":20.0}]}"#).unwrap();
        assert_eq!(a.events(), &[MitosisEvent::new(3, 10.5, 20.0)]);
        assert!(parse_annotations(r#"{"events":[]}"#).unwrap().is_empty());
        let named = parse_annotations(r#"{"sequence":"hela","events":[]}"#).unwrap();
        assert_eq!(named.sequence_name(), "hela");
    }

    #[test]
    fn rejects_bad_input() {
        let dup = r#"{"events":[{"t":3,"x":1,"y":2},{"t":3,"x":1,"y":2}]}"#;
        assert!(parse_annotations(dup).unwrap_err().contains("duplicate"));
        assert!(parse_annotations(r#"{"events":[{"t":3,"x":-1,"y":2}]}"#).is_err());
        assert!(parse_annotations(r#"{"events":[{"t":-3,"x":1,"y":2}]}"#).is_err());
        assert!(parse_annotations(r#"{"events":[{"t":3,"x":1}]}"#).is_err());
        assert!(parse_annotations("{not json").is_err());
    }
}
