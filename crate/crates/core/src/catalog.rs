//! Reference parameter tables: NBS costs and kernel shapes/ranges.
//!
//! Values are taken as given inputs. Bump [`CATALOG_VERSION`] whenever any of
//! them change.

pub const CATALOG_VERSION: &str = "1";

/// NBS identifiers in catalog order.
pub const NBS_IDS: [&str; 4] = ["GW", "GR", "ST", "UP"];

/// Urban-challenge measure identifiers in catalog order.
pub const MEASURE_IDS: [&str; 4] = ["temp_max", "temp_min", "pm25", "pm10"];

/// Default NBS that gets all-or-nothing clustering.
pub const CLUSTERED_NBS: &str = "UP";

pub struct NbsInfo {
    pub id: &'static str,
    pub name: &'static str,
    /// Installation cost, EUR per m^2.
    pub install_per_m2: f64,
    /// Maintenance cost, EUR per m^2 per year.
    pub maintenance_per_m2: f64,
    /// Annual total (maintenance plus 7-year depreciated installation), EUR per m^2 per year.
    pub total_per_m2: f64,
}

pub const NBS_CATALOG: [NbsInfo; 4] = [
    NbsInfo {
        id: "GW",
        name: "Green Wall",
        install_per_m2: 470.0,
        maintenance_per_m2: 11.8,
        total_per_m2: 78.9,
    },
    NbsInfo {
        id: "GR",
        name: "Green Roof",
        install_per_m2: 310.0,
        maintenance_per_m2: 7.8,
        total_per_m2: 52.0,
    },
    NbsInfo {
        id: "ST",
        name: "Street Trees",
        install_per_m2: 125.0,
        maintenance_per_m2: 3.1,
        total_per_m2: 21.0,
    },
    NbsInfo {
        id: "UP",
        name: "Urban Park",
        install_per_m2: 225.0,
        maintenance_per_m2: 5.6,
        total_per_m2: 37.8,
    },
];

pub struct MeasureInfo {
    pub id: &'static str,
    pub unit: &'static str,
    /// Typical observed range used by the synthetic generator.
    pub observed_range: (f64, f64),
}

pub const MEASURE_CATALOG: [MeasureInfo; 4] = [
    MeasureInfo {
        id: "temp_max",
        unit: "degC",
        observed_range: (4.95, 35.60),
    },
    MeasureInfo {
        id: "temp_min",
        unit: "degC",
        observed_range: (-2.29, 25.19),
    },
    MeasureInfo {
        id: "pm25",
        unit: "ug/m3",
        observed_range: (5.98, 34.24),
    },
    MeasureInfo {
        id: "pm10",
        unit: "ug/m3",
        observed_range: (1.79, 67.93),
    },
];

/// Kernel shape entry: (side length, edge value, center value).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelEntry {
    pub size: usize,
    pub edge: f64,
    pub center: f64,
}

const fn k(size: usize, edge: f64, center: f64) -> KernelEntry {
    KernelEntry { size, edge, center }
}

/// Rows follow [`NBS_IDS`], columns follow [`MEASURE_IDS`].
pub const MEASURE_KERNELS: [[KernelEntry; 4]; 4] = [
    [
        k(5, 0.10, 2.70),
        k(3, 0.10, 1.90),
        k(5, 0.10, 5.03),
        k(5, 0.10, 12.90),
    ],
    [
        k(5, 0.10, 2.00),
        k(3, 0.10, 1.40),
        k(5, 0.10, 2.51),
        k(5, 0.10, 6.45),
    ],
    [
        k(5, 0.10, 1.30),
        k(3, 0.10, 0.70),
        k(3, 0.10, 4.02),
        k(3, 0.10, 10.32),
    ],
    [
        k(5, 0.10, 3.50),
        k(3, 0.10, 2.50),
        k(7, 0.10, 5.03),
        k(7, 0.10, 12.90),
    ],
];

/// Fairness kernels, indexed like [`NBS_IDS`]. The 1x1 Green Roof entry only
/// materializes its center value.
pub const FAIRNESS_KERNELS: [KernelEntry; 4] = [
    k(5, 2.0, 6.0),
    k(1, 0.1, 2.0),
    k(3, 0.1, 4.0),
    k(11, 4.0, 10.0),
];

/// Minimum over maximum temperature ratio.
pub const MIN_TEMP_RATIO: f64 = 0.7;

/// Share of the largest observed value taken as the reduction cap.
pub const DELTA_SHARE: f64 = 0.2;

pub fn nbs_position(id: &str) -> Option<usize> {
    NBS_IDS.iter().position(|&n| n == id)
}

pub fn measure_position(id: &str) -> Option<usize> {
    MEASURE_IDS.iter().position(|&m| m == id)
}

/// Synthetic benchmark sizes: name and grid side.
pub const SIZE_CLASSES: [(&str, usize); 4] = [("xs", 50), ("s", 100), ("m", 200), ("l", 300)];

pub fn size_class(name: &str) -> Option<usize> {
    let lower = name.to_ascii_lowercase();
    SIZE_CLASSES
        .iter()
        .find(|(n, _)| *n == lower)
        .map(|&(_, side)| side)
}
