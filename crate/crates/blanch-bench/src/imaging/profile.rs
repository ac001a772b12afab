use super::{ColorChangeMap, ImagingError};
use std::path::Path;

/// Default segment length in mm, spanning the nail and surrounding skin.
pub const DEFAULT_PROFILE_LENGTH_MM: f64 = 14.0;
/// Default angle step in degrees (9 bidirectional segments = 18 lines).
pub const DEFAULT_ANGLE_STEP_DEG: f64 = 20.0;

/// Signed-distance profile averaged over line segments through the center.
///
/// Distances run symmetrically from `-length/2` to `length/2`. Each segment
/// covers an angle and its opposite, so `n_angles` counts directed
/// half-lines: the default 20 degree step over 180 degrees gives 9 segments
/// and 18 lines.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub distance_mm: Vec<f64>,
    pub value: Vec<f64>,
    pub n_angles: usize,
}

/// Profile folded to nonnegative distances by averaging mirror samples.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfProfile {
    pub distance_mm: Vec<f64>,
    pub value: Vec<f64>,
}

/// Averages bilinear samples along center segments every `angle_step_deg`
/// over 180 degrees.
///
/// `samples_per_line` defaults to an odd count spaced about one pixel apart
/// (always including the center). Errors if any segment leaves the map.
pub fn radial_profile(
    map: &ColorChangeMap,
    length_mm: f64,
    angle_step_deg: f64,
    samples_per_line: Option<usize>,
) -> Result<RadialProfile, ImagingError> {
    if !(length_mm.is_finite() && length_mm > 0.0) {
        return Err(ImagingError::InvalidParameter(format!(
            "profile length must be positive, got {length_mm}"
        )));
    }
    if !(angle_step_deg.is_finite() && angle_step_deg > 0.0 && angle_step_deg <= 180.0) {
        return Err(ImagingError::InvalidParameter(format!(
            "angle step must lie in (0, 180], got {angle_step_deg}"
        )));
    }
    let n_samples = match samples_per_line {
        Some(n) => {
            if n < 2 {
                return Err(ImagingError::InvalidParameter(
                    "need at least 2 samples per line".into(),
                ));
            }
            n
        }
        None => {
            let half_count = (0.5 * length_mm / map.mm_per_pixel).round().max(1.0) as usize;
            2 * half_count + 1
        }
    };
    let n_segments = ((180.0 - 1e-9) / angle_step_deg).floor() as usize + 1;
    let spacing = length_mm / (n_samples - 1) as f64;
    let mid = (n_samples - 1) as f64 / 2.0;
    // (k - mid) * spacing negates exactly under k -> n-1-k, keeping the
    // distance grid bitwise symmetric.
    let distance_mm: Vec<f64> = (0..n_samples).map(|k| (k as f64 - mid) * spacing).collect();

    let [cx, cy] = map.center_px;
    let mut value = vec![0.0; n_samples];
    for s in 0..n_segments {
        let angle_deg = s as f64 * angle_step_deg;
        let (sin, cos) = angle_deg.to_radians().sin_cos();
        for (k, &d) in distance_mm.iter().enumerate() {
            let x = cx + cos * d / map.mm_per_pixel;
            let y = cy + sin * d / map.mm_per_pixel;
            let sample = map.values.sample_bilinear(x, y).ok_or(
                ImagingError::SegmentOutOfBounds { angle_deg, x, y },
            )?;
            value[k] += sample;
        }
    }
    for v in &mut value {
        *v /= n_segments as f64;
    }
    Ok(RadialProfile {
        distance_mm,
        value,
        n_angles: 2 * n_segments,
    })
}

/// Folds a symmetric signed-distance profile onto `[0, length/2]` by
/// averaging each +-distance pair.
pub fn fold_profile(profile: &RadialProfile) -> Result<HalfProfile, ImagingError> {
    let n = profile.distance_mm.len();
    if n == 0 || profile.value.len() != n {
        return Err(ImagingError::InvalidParameter(
            "profile is empty or inconsistently sized".into(),
        ));
    }
    let scale = profile
        .distance_mm
        .iter()
        .fold(0.0_f64, |m, &d| m.max(d.abs()))
        .max(f64::MIN_POSITIVE);
    for k in 0..n / 2 {
        if (profile.distance_mm[k] + profile.distance_mm[n - 1 - k]).abs() > 1e-9 * scale {
            return Err(ImagingError::AsymmetricSamples);
        }
    }
    let mut distance_mm = Vec::new();
    let mut value = Vec::new();
    if n % 2 == 1 {
        let mid = n / 2;
        if profile.distance_mm[mid].abs() > 1e-9 * scale {
            return Err(ImagingError::AsymmetricSamples);
        }
        distance_mm.push(0.0);
        value.push(profile.value[mid]);
        for j in 1..=mid {
            distance_mm.push(profile.distance_mm[mid + j]);
            value.push(0.5 * (profile.value[mid + j] + profile.value[mid - j]));
        }
    } else {
        for j in 0..n / 2 {
            distance_mm.push(profile.distance_mm[n / 2 + j]);
            value.push(0.5 * (profile.value[n / 2 + j] + profile.value[n / 2 - 1 - j]));
        }
    }
    Ok(HalfProfile { distance_mm, value })
}

impl HalfProfile {
    /// Linear interpolation at `distance_mm`, `None` outside the range.
    pub fn interp_at(&self, distance_mm: f64) -> Option<f64> {
        let d = &self.distance_mm;
        if d.is_empty() || distance_mm < d[0] || distance_mm > d[d.len() - 1] {
            return None;
        }
        let idx = match d.binary_search_by(|probe| probe.partial_cmp(&distance_mm).unwrap()) {
            Ok(i) => return Some(self.value[i]),
            Err(i) => i,
        };
        let (d0, d1) = (d[idx - 1], d[idx]);
        let t = (distance_mm - d0) / (d1 - d0);
        Some(self.value[idx - 1] * (1.0 - t) + self.value[idx] * t)
    }

    /// Writes `distance_mm,value` rows.
    pub fn write_csv(&self, path: &Path) -> Result<(), ImagingError> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["distance_mm", "value"])?;
        for (d, v) in self.distance_mm.iter().zip(&self.value) {
            writer.write_record([d.to_string(), v.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, ImagingError> {
        let malformed = |message: String| ImagingError::MalformedFile {
            path: path.display().to_string(),
            message,
        };
        let mut reader = csv::Reader::from_path(path)?;
        if reader.headers()?.iter().collect::<Vec<_>>() != ["distance_mm", "value"] {
            return Err(malformed("expected header distance_mm,value".into()));
        }
        let mut distance_mm = Vec::new();
        let mut value = Vec::new();
        for record in reader.records() {
            let record = record?;
            let parse = |k: usize| {
                record
                    .get(k)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| malformed(format!("bad row {record:?}")))
            };
            distance_mm.push(parse(0)?);
            value.push(parse(1)?);
        }
        if distance_mm.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(malformed("distances must be strictly increasing".into()));
        }
        Ok(HalfProfile { distance_mm, value })
    }
}
