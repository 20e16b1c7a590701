//! Generator seed tables: measured parameter combinations that yield graphs
//! with a given node count, average degree and plane coverage.

use crate::generator::SeedTableRow;

/// Seeds for coverage 0.75..0.80 and average degree `deg_exp..deg_exp + 0.25`.
pub const TABLE_COVERAGE_75: &[SeedTableRow] = &[
    row(20, 3.0, 0.210938, 0.309375, 0.771, 3.057, 0.857),
    row(20, 4.0, 0.210938, 0.363867, 0.771, 4.082, 1.000),
    row(20, 5.0, 0.210938, 0.422900, 0.771, 5.228, 1.000),
    row(20, 6.0, 0.210938, 0.453339, 0.771, 6.066, 1.000),
    row(40, 3.0, 0.143372, 0.206250, 0.796, 3.223, 0.866),
    row(40, 4.0, 0.143372, 0.235803, 0.796, 4.226, 1.000),
    row(40, 5.0, 0.143372, 0.270884, 0.796, 5.203, 1.000),
    row(40, 6.0, 0.143372, 0.293691, 0.796, 6.075, 1.000),
    row(60, 3.0, 0.113689, 0.159375, 0.780, 3.081, 0.555),
    row(60, 4.0, 0.113689, 0.183259, 0.780, 4.094, 1.000),
    row(60, 5.0, 0.113689, 0.207903, 0.780, 5.080, 1.000),
    row(60, 6.0, 0.113689, 0.229350, 0.780, 6.075, 1.000),
    row(80, 3.0, 0.095925, 0.135937, 0.751, 3.196, 0.550),
    row(80, 4.0, 0.095925, 0.153683, 0.751, 4.073, 0.950),
    row(80, 5.0, 0.095925, 0.174016, 0.751, 5.017, 1.000),
    row(80, 6.0, 0.095925, 0.193037, 0.751, 6.085, 1.000),
    row(100, 3.0, 0.086932, 0.121875, 0.781, 3.248, 0.600),
    row(100, 4.0, 0.086932, 0.137779, 0.781, 4.154, 0.950),
    row(100, 5.0, 0.086932, 0.155897, 0.781, 5.161, 1.000),
    row(100, 6.0, 0.086932, 0.169825, 0.781, 6.021, 1.000),
    row(120, 3.0, 0.078782, 0.107812, 0.783, 3.150, 0.368),
    row(120, 4.0, 0.078782, 0.122796, 0.783, 4.089, 0.950),
    row(120, 5.0, 0.078782, 0.139347, 0.783, 5.111, 1.000),
    row(120, 6.0, 0.078782, 0.154586, 0.783, 6.138, 1.000),
    row(140, 3.0, 0.071397, 0.098437, 0.758, 3.000, 0.100),
    row(140, 4.0, 0.071397, 0.113661, 0.758, 4.133, 1.000),
    row(140, 5.0, 0.071397, 0.126504, 0.758, 5.022, 1.000),
    row(140, 6.0, 0.071397, 0.140545, 0.758, 6.072, 1.000),
    row(160, 3.0, 0.066934, 0.093750, 0.755, 3.203, 0.100),
    row(160, 4.0, 0.066934, 0.106195, 0.755, 4.195, 0.950),
    row(160, 5.0, 0.066934, 0.118888, 0.755, 5.168, 1.000),
    row(160, 6.0, 0.066934, 0.129716, 0.755, 6.044, 1.000),
    row(180, 3.0, 0.062751, 0.086719, 0.750, 3.096, 0.200),
    row(180, 4.0, 0.062751, 0.098891, 0.750, 4.087, 0.850),
    row(180, 5.0, 0.062751, 0.111389, 0.750, 5.121, 1.000),
    row(180, 6.0, 0.062751, 0.122844, 0.750, 6.168, 1.000),
    row(200, 3.0, 0.060790, 0.082031, 0.790, 3.103, 0.157),
    row(200, 4.0, 0.060790, 0.094676, 0.790, 4.211, 1.000),
    row(200, 5.0, 0.060790, 0.105122, 0.790, 5.124, 1.000),
    row(200, 6.0, 0.060790, 0.116198, 0.790, 6.123, 1.000),
    row(220, 3.0, 0.056991, 0.077344, 0.755, 3.039, 0.250),
    row(220, 4.0, 0.056991, 0.088177, 0.755, 4.069, 0.900),
    row(220, 5.0, 0.056991, 0.100885, 0.755, 5.234, 1.000),
    row(220, 6.0, 0.056991, 0.110456, 0.755, 6.172, 1.000),
    row(240, 3.0, 0.054319, 0.075000, 0.772, 3.156, 0.200),
    row(240, 4.0, 0.054319, 0.084882, 0.772, 4.085, 0.850),
    row(240, 5.0, 0.054319, 0.094884, 0.772, 5.086, 1.000),
    row(240, 6.0, 0.054319, 0.104616, 0.772, 6.059, 1.000),
    row(260, 3.0, 0.052622, 0.071484, 0.779, 3.103, 0.200),
    row(260, 4.0, 0.052622, 0.081533, 0.779, 4.151, 1.000),
    row(260, 5.0, 0.052622, 0.091546, 0.779, 5.135, 0.950),
    row(260, 6.0, 0.052622, 0.101349, 0.779, 6.213, 1.000),
    row(280, 3.0, 0.050977, 0.067969, 0.777, 3.012, 0.100),
    row(280, 4.0, 0.050977, 0.078142, 0.777, 4.122, 0.850),
    row(280, 5.0, 0.050977, 0.088195, 0.777, 5.175, 1.000),
    row(280, 6.0, 0.050977, 0.096416, 0.777, 6.094, 1.000),
    row(300, 3.0, 0.048588, 0.065625, 0.765, 3.028, 0.100),
    row(300, 4.0, 0.048588, 0.075013, 0.765, 4.097, 0.900),
    row(300, 5.0, 0.048588, 0.084900, 0.765, 5.166, 1.000),
    row(300, 6.0, 0.048588, 0.093537, 0.765, 6.180, 1.000),
];

/// A coverage-bucketed seed row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageBucketRow {
    pub expected_coverage: (f64, f64),
    pub row: SeedTableRow,
}

/// Seeds per expected-coverage bucket for |V| in {100, 200}, degree 4 and 5.
pub const TABLE_COVERAGE_BUCKETS: &[CoverageBucketRow] = &[
    bucket((0.45, 0.5), row(100, 4.0, 0.0732, 0.135, 0.498, 4.113, 1.00)),
    bucket((0.45, 0.5), row(100, 5.0, 0.0732, 0.150, 0.498, 5.019, 1.00)),
    bucket((0.45, 0.5), row(200, 4.0, 0.0503, 0.093, 0.463, 4.115, 0.70)),
    bucket((0.45, 0.5), row(200, 5.0, 0.0503, 0.103, 0.463, 5.087, 1.00)),
    bucket((0.5, 0.55), row(100, 4.0, 0.0747, 0.135, 0.516, 4.092, 0.75)),
    bucket((0.5, 0.55), row(100, 5.0, 0.0747, 0.150, 0.516, 5.024, 1.00)),
    bucket((0.5, 0.55), row(200, 4.0, 0.0525, 0.093, 0.531, 4.096, 0.90)),
    bucket((0.5, 0.55), row(200, 5.0, 0.0525, 0.105, 0.531, 5.209, 0.95)),
    bucket((0.55, 0.6), row(100, 4.0, 0.0761, 0.135, 0.561, 4.058, 0.85)),
    bucket((0.55, 0.6), row(100, 5.0, 0.0761, 0.154, 0.561, 5.240, 1.00)),
    bucket((0.55, 0.6), row(200, 4.0, 0.0535, 0.093, 0.565, 4.115, 0.75)),
    bucket((0.55, 0.6), row(200, 5.0, 0.0535, 0.105, 0.565, 5.223, 1.00)),
    bucket((0.6, 0.65), row(100, 4.0, 0.0791, 0.135, 0.630, 4.105, 1.00)),
    bucket((0.6, 0.65), row(100, 5.0, 0.0791, 0.154, 0.630, 5.213, 1.00)),
    bucket((0.6, 0.65), row(200, 4.0, 0.0543, 0.093, 0.601, 4.113, 0.85)),
    bucket((0.6, 0.65), row(200, 5.0, 0.0543, 0.105, 0.601, 5.179, 1.00)),
    bucket((0.65, 0.7), row(100, 4.0, 0.0805, 0.135, 0.658, 4.062, 1.00)),
    bucket((0.65, 0.7), row(100, 5.0, 0.0805, 0.154, 0.658, 5.144, 1.00)),
    bucket((0.65, 0.7), row(200, 4.0, 0.0566, 0.093, 0.668, 4.147, 0.85)),
    bucket((0.65, 0.7), row(200, 5.0, 0.0566, 0.105, 0.668, 5.185, 1.00)),
    bucket((0.7, 0.75), row(100, 4.0, 0.0820, 0.135, 0.704, 4.119, 0.90)),
    bucket((0.7, 0.75), row(100, 5.0, 0.0820, 0.154, 0.704, 5.113, 1.00)),
    bucket((0.7, 0.75), row(200, 4.0, 0.0589, 0.093, 0.732, 4.131, 0.90)),
    bucket((0.7, 0.75), row(200, 5.0, 0.0589, 0.105, 0.732, 5.182, 1.00)),
    bucket((0.75, 0.8), row(100, 4.0, 0.0878, 0.135, 0.797, 4.092, 1.00)),
    bucket((0.75, 0.8), row(100, 5.0, 0.0878, 0.157, 0.797, 5.238, 1.00)),
    bucket((0.75, 0.8), row(200, 4.0, 0.0597, 0.093, 0.759, 4.148, 0.95)),
    bucket((0.75, 0.8), row(200, 5.0, 0.0597, 0.105, 0.759, 5.163, 1.00)),
    bucket((0.8, 0.85), row(100, 4.0, 0.0878, 0.135, 0.800, 4.125, 1.00)),
    bucket((0.8, 0.85), row(100, 5.0, 0.0878, 0.154, 0.800, 5.050, 1.00)),
    bucket((0.8, 0.85), row(200, 4.0, 0.0617, 0.093, 0.815, 4.120, 1.00)),
    bucket((0.8, 0.85), row(200, 5.0, 0.0617, 0.105, 0.815, 5.135, 1.00)),
];

const fn row(
    n_nodes: usize,
    deg_exp: f64,
    lambda: f64,
    r_tr: f64,
    mean_coverage: f64,
    mean_avg_degree: f64,
    p_connected: f64,
) -> SeedTableRow {
    SeedTableRow { n_nodes, deg_exp, lambda, r_tr, mean_coverage, mean_avg_degree, p_connected }
}

const fn bucket(expected_coverage: (f64, f64), row: SeedTableRow) -> CoverageBucketRow {
    CoverageBucketRow { expected_coverage, row }
}

/// Row of [`TABLE_COVERAGE_75`] for `(n_nodes, deg_exp)`.
pub fn coverage_75_row(n_nodes: usize, deg_exp: u32) -> Option<SeedTableRow> {
    TABLE_COVERAGE_75.iter().copied().find(|r| r.n_nodes == n_nodes && r.deg_exp == deg_exp as f64)
}

/// Rows of [`TABLE_COVERAGE_BUCKETS`] for `(n_nodes, deg_exp)`, ordered by bucket.
pub fn coverage_bucket_rows(n_nodes: usize, deg_exp: u32) -> Vec<CoverageBucketRow> {
    TABLE_COVERAGE_BUCKETS
        .iter()
        .copied()
        .filter(|b| b.row.n_nodes == n_nodes && b.row.deg_exp == deg_exp as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_complete() {
        assert_eq!(TABLE_COVERAGE_75.len(), 60);
        assert_eq!(TABLE_COVERAGE_BUCKETS.len(), 32);
        let r = coverage_75_row(20, 4).unwrap();
        assert_eq!((r.lambda, r.r_tr), (0.210938, 0.363867));
        assert_eq!(coverage_bucket_rows(100, 5).len(), 8);
        for r in TABLE_COVERAGE_75 {
            assert!(r.lambda < r.r_tr);
        }
    }
}
