//! Parsing of chi/xi specifications: a JSON object mapping canonical scalar
//! strings to weight coordinate vectors, e.g. `{"2": [1,0], "-2": [0,1]}`.

use std::collections::BTreeMap;

use weyl_core::rootdata::Weight;
use weyl_core::scalar::Scalar;
use weyl_core::xi::XiFunction;

/// Parse a chi specification. With `symmetrize` the function is completed to
/// an equivariant one by the symmetrizer; otherwise equivariance is required.
pub fn parse_chi(
    json: &str,
    m: u8,
    rank: usize,
    perm: &[usize],
    symmetrize: bool,
) -> Result<XiFunction, String> {
    let raw: BTreeMap<String, Vec<i64>> =
        serde_json::from_str(json).map_err(|e| format!("chi-spec JSON: {e}"))?;
    let mut xi = XiFunction::empty(m, rank);
    for (point_str, coords) in raw {
        let point = Scalar::parse(m, &point_str).map_err(|e| format!("chi-spec point: {e}"))?;
        if coords.len() != rank {
            return Err(format!(
                "chi-spec weight {coords:?} has {} coordinates, expected {rank}",
                coords.len()
            ));
        }
        xi.insert(point, Weight::new(coords)).map_err(|e| format!("chi-spec: {e}"))?;
    }
    if symmetrize {
        Ok(xi.symmetrize(perm))
    } else if xi.is_equivariant(perm) {
        Ok(xi)
    } else {
        Err("chi-spec is not equivariant; pass --symmetrize to complete it".to_string())
    }
}
