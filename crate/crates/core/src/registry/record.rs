use super::RegistryError;

/// Feature columns in a patient record row, after the patient id.
pub const RECORD_FEATURES: usize = 13;

/// Canonical record row: `id,f1,...,f13` with shortest round-trip number
/// formatting.
pub fn encode_record(patient: &str, features: &[f64]) -> Result<String, RegistryError> {
    if features.len() != RECORD_FEATURES {
        return Err(RegistryError::RecordFormat(format!(
            "expected {RECORD_FEATURES} features, got {}",
            features.len()
        )));
    }
    if let Some(bad) = features.iter().find(|v| !v.is_finite()) {
        return Err(RegistryError::RecordFormat(format!("non-finite feature {bad}")));
    }
    super::validate_id(patient).map_err(|e| RegistryError::RecordFormat(e.to_string()))?;
    let mut row = patient.to_string();
    for v in features {
        row.push(',');
        row.push_str(&v.to_string());
    }
    Ok(row)
}

pub fn decode_record(bytes: &[u8]) -> Result<(String, Vec<f64>), RegistryError> {
    let text = std::str::from_utf8(bytes).map_err(|_| RegistryError::RecordFormat("record is not UTF-8".into()))?;
    let mut cells = text.split(',');
    let id = cells.next().unwrap_or_default().to_string();
    let features = cells
        .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| RegistryError::RecordFormat("unparseable feature".into()))?;
    if features.len() != RECORD_FEATURES {
        return Err(RegistryError::RecordFormat(format!(
            "expected {RECORD_FEATURES} features, got {}",
            features.len()
        )));
    }
    Ok((id, features))
}

/// Key-derivation context of one record version.
pub fn record_context(patient: &str, version: u64) -> Vec<u8> {
    format!("{patient}/v{version}").into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = [63.0, 1.0, 1.0, 145.0, 233.0, 1.0, 2.0, 150.0, 0.0, 2.3, 3.0, 0.0, 6.0];
        let row = encode_record("Patient 01", &f).unwrap();
        assert_eq!(row, "Patient 01,63,1,1,145,233,1,2,150,0,2.3,3,0,6");
        assert_eq!(decode_record(row.as_bytes()).unwrap(), ("Patient 01".to_string(), f.to_vec()));
    }

    #[test]
    fn malformed_rows() {
        assert!(encode_record("P", &[1.0; 12]).is_err());
        assert!(decode_record(b"P,1,2").is_err());
        assert!(decode_record(b"P,1,2,3,4,5,6,7,8,9,10,11,12,x").is_err());
        assert!(decode_record(&[0xff, 0x2c]).is_err());
    }
}
