//! Spatial weights and Getis-Ord G_i* hot-spot scores.
//!
//! For unit `i` with weights `w_ij` (self included by default):
//!
//! ```text
//!          sum_j w_ij x_j - xbar sum_j w_ij
//! G_i* = ------------------------------------------------------
//!        S sqrt( (n sum_j w_ij^2 - (sum_j w_ij)^2) / (n - 1) )
//! ```
//!
//! with `xbar` the mean of the values and `S = sqrt(sum_j x_j^2 / n - xbar^2)`.
//! A zero `S` or a zero variance bracket gives `G_i* = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;
pub const Z_95: f64 = 1.96;
pub const Z_99: f64 = 2.576;

/// Great-circle distance in kilometres between two (lat, lon) points given
/// in degrees.
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// Binary weight for every pair within `km` kilometres.
    DistanceBand { km: f64 },
    /// Binary weight for each unit's `k` nearest neighbours.
    KNearest { k: usize },
    /// Weights supplied directly.
    Custom,
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightScheme::DistanceBand { km } => write!(f, "band:{km}"),
            WeightScheme::KNearest { k } => write!(f, "knn:{k}"),
            WeightScheme::Custom => f.write_str("custom"),
        }
    }
}

/// Parses `band:KM` or `knn:K`.
impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("weights must be band:KM or knn:K, got '{s}'"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "band" => Ok(WeightScheme::DistanceBand {
                km: arg.trim().parse().map_err(|_| bad())?,
            }),
            "knn" => Ok(WeightScheme::KNearest {
                k: arg.trim().parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Sparse non-negative n x n weights, stored by row as `(column, weight)`
/// pairs sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialWeights {
    rows: Vec<Vec<(usize, f64)>>,
    scheme: WeightScheme,
    include_self: bool,
}

impl SpatialWeights {
    /// Weights from a dense row-major matrix. Zero entries are dropped; the
    /// matrix must be square with non-negative finite entries.
    pub fn from_dense(matrix: &[Vec<f64>]) -> Result<Self> {
        let n = matrix.len();
        let mut rows = Vec::with_capacity(n);
        for row in matrix {
            check_len("weights row", n, row.len())?;
            if row.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
            }
            rows.push(row.iter().enumerate().filter(|(_, &w)| w != 0.0).map(|(j, &w)| (j, w)).collect());
        }
        let include_self = (0..n).all(|i| matrix[i][i] != 0.0);
        Ok(Self {
            rows,
            scheme: WeightScheme::Custom,
            include_self,
        })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn include_self(&self) -> bool {
        self.include_self
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map_or(0.0, |pos| self.rows[i][pos].1)
    }

    /// Off-diagonal neighbours of unit `i`.
    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        self.rows[i].iter().map(|&(j, _)| j).filter(|&j| j != i).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                for &(j, w) in &self.rows[i] {
                    row[j] = w;
                }
                row
            })
            .collect()
    }
}

/// Binary weights with `w_ii = 1` (the G_i* convention).
pub fn build_weights(centroids: &[(f64, f64)], scheme: WeightScheme) -> Result<SpatialWeights> {
    build_weights_with(centroids, scheme, true)
}

/// Binary weights from great-circle distances between centroids. Nearest
/// neighbour ties are broken by the smaller index.
pub fn build_weights_with(centroids: &[(f64, f64)], scheme: WeightScheme, include_self: bool) -> Result<SpatialWeights> {
    let n = centroids.len();
    if n < 2 {
        return Err(Error::DegenerateGeometry(format!("{n} unit(s); at least 2 are required")));
    }
    if centroids.iter().all(|&c| c == centroids[0]) {
        return Err(Error::DegenerateGeometry("all centroids coincide".into()));
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    match scheme {
        WeightScheme::DistanceBand { km } => {
            if !(km > 0.0 && km.is_finite()) {
                return Err(Error::InvalidArgument(format!("band distance {km} must be positive")));
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if haversine_km(centroids[i], centroids[j]) <= km {
                        rows[i].push((j, 1.0));
                        rows[j].push((i, 1.0));
                    }
                }
            }
        }
        WeightScheme::KNearest { k } => {
            if k == 0 {
                return Err(Error::InvalidArgument("k must be at least 1".into()));
            }
            if k >= n {
                return Err(Error::KTooLarge { k, n });
            }
            let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
            for (i, row) in rows.iter_mut().enumerate() {
                candidates.clear();
                candidates.extend((0..n).filter(|&j| j != i).map(|j| (haversine_km(centroids[i], centroids[j]), j)));
                let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                candidates.select_nth_unstable_by(k - 1, by_distance);
                row.extend(candidates[..k].iter().map(|&(_, j)| (j, 1.0)));
            }
        }
        WeightScheme::Custom => {
            return Err(Error::InvalidArgument("custom weights are built with SpatialWeights::from_dense".into()));
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        if include_self {
            row.push((i, 1.0));
        }
        row.sort_unstable_by_key(|&(j, _)| j);
    }
    Ok(SpatialWeights {
        rows,
        scheme,
        include_self,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HotspotClass {
    Hot99,
    Hot95,
    NotSignificant,
    Cold95,
    Cold99,
}

impl HotspotClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            HotspotClass::Hot99 => "Hot99",
            HotspotClass::Hot95 => "Hot95",
            HotspotClass::NotSignificant => "NotSignificant",
            HotspotClass::Cold95 => "Cold95",
            HotspotClass::Cold99 => "Cold99",
        }
    }

    pub fn is_hot(&self) -> bool {
        matches!(self, HotspotClass::Hot95 | HotspotClass::Hot99)
    }

    pub fn is_cold(&self) -> bool {
        matches!(self, HotspotClass::Cold95 | HotspotClass::Cold99)
    }
}

impl fmt::Display for HotspotClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Two-sided 95% / 99% bands on the z score. Non-finite input is not
/// significant.
pub fn classify(z: f64) -> HotspotClass {
    if z >= Z_99 {
        HotspotClass::Hot99
    } else if z >= Z_95 {
        HotspotClass::Hot95
    } else if z <= -Z_99 {
        HotspotClass::Cold99
    } else if z <= -Z_95 {
        HotspotClass::Cold95
    } else {
        HotspotClass::NotSignificant
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotspotResult {
    pub z: Vec<f64>,
    pub class: Vec<HotspotClass>,
    /// Mean of the values.
    pub mean: f64,
    /// Population standard deviation of the values.
    pub scale: f64,
}

/// G_i* z score for every unit.
pub fn getis_ord_gstar(values: &[f64], weights: &SpatialWeights) -> Result<HotspotResult> {
    let n = values.len();
    check_len("values", weights.n(), n)?;
    if n < 2 {
        return Err(Error::DegenerateData("G_i* needs at least 2 units".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::DomainError("values must be finite".into()));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let constant = values.iter().all(|&v| v == values[0]);
    // sum x^2 / n - xbar^2, evaluated in centred form
    let scale = if constant {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf).sqrt()
    };

    let z: Vec<f64> = (0..n)
        .map(|i| {
            if scale == 0.0 {
                return 0.0;
            }
            let row = weights.row(i);
            let sum_w: f64 = row.iter().map(|&(_, w)| w).sum();
            let sum_w2: f64 = row.iter().map(|&(_, w)| w * w).sum();
            let sum_wx: f64 = row.iter().map(|&(j, w)| w * values[j]).sum();
            let bracket = nf * sum_w2 - sum_w * sum_w;
            if bracket <= 4.0 * f64::EPSILON * nf * sum_w2 {
                return 0.0;
            }
            (sum_wx - mean * sum_w) / (scale * (bracket / (nf - 1.0)).sqrt())
        })
        .collect();
    let class = z.iter().map(|&z| classify(z)).collect();
    Ok(HotspotResult { z, class, mean, scale })
}
