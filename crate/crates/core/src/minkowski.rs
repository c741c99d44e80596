//! Minkowski functionals of a bordered binary image.
//!
//! A 2×2 window is slid over all `(m+1)²` positions of the `(m+2) × (m+2)`
//! bordered image and each configuration is scored from a 16-entry table.
//! Scores are kept in integer units (quarter pixels for the area, half
//! edges for the perimeter, quarters for the Euler characteristic) so the
//! sums are exact and row bands can be reduced in any order. Scaling by
//! `1/m` happens once at the end.

use core::ops::{Add, AddAssign, Range};

use crate::grid::BinaryImage;

/// One of the 16 configurations of a 2×2 window.
///
/// `index = 1 + 8·TL + 4·TR + 2·BL + BR`, where TL/TR/BL/BR are the
/// top-left, top-right, bottom-left and bottom-right cells (1 = black).
/// Index 1 is all white, 16 all black; 7 and 10 are the two diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowConfig(u8);

impl WindowConfig {
    pub fn from_index(index: u8) -> Option<Self> {
        (1..=16).contains(&index).then_some(WindowConfig(index))
    }

    pub fn from_cells(tl: bool, tr: bool, bl: bool, br: bool) -> Self {
        WindowConfig(1 + code(tl, tr, bl, br))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// The four cells as `(tl, tr, bl, br)`.
    pub fn cells(self) -> (bool, bool, bool, bool) {
        let b = self.0 - 1;
        (b & 8 != 0, b & 4 != 0, b & 2 != 0, b & 1 != 0)
    }

    pub fn black_count(self) -> u32 {
        u32::from(self.0 - 1).count_ones()
    }

    pub fn units(self) -> WindowUnits {
        LOOKUP_UNITS[usize::from(self.0 - 1)]
    }
}

#[inline(always)]
fn code(tl: bool, tr: bool, bl: bool, br: bool) -> u8 {
    (u8::from(tl) << 3) | (u8::from(tr) << 2) | (u8::from(bl) << 1) | u8::from(br)
}

/// Integer contributions of one window: area in quarter pixels, perimeter
/// in half edges, Euler characteristic in quarters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowUnits {
    pub area_quarters: u8,
    pub perimeter_halves: u8,
    pub euler_quarters: i8,
}

const fn units(area_quarters: u8, perimeter_halves: u8, euler_quarters: i8) -> WindowUnits {
    WindowUnits { area_quarters, perimeter_halves, euler_quarters }
}

/// Look-up table indexed by `index - 1`.
pub const LOOKUP_UNITS: [WindowUnits; 16] = [
    units(0, 0, 0),  // 1: empty
    units(1, 2, 1),  // 2: BR
    units(1, 2, 1),  // 3: BL
    units(2, 2, 0),  // 4: BL BR
    units(1, 2, 1),  // 5: TR
    units(2, 2, 0),  // 6: TR BR
    units(2, 4, -2), // 7: TR BL (diagonal)
    units(3, 2, -1), // 8: TR BL BR
    units(1, 2, 1),  // 9: TL
    units(2, 4, -2), // 10: TL BR (diagonal)
    units(2, 2, 0),  // 11: TL BL
    units(3, 2, -1), // 12: TL BL BR
    units(2, 2, 0),  // 13: TL TR
    units(3, 2, -1), // 14: TL TR BR
    units(3, 2, -1), // 15: TL TR BL
    units(4, 0, 0),  // 16: full
];

/// `(A, P, χ)` contribution of a configuration, unit length = one bin edge.
pub fn lookup(config: WindowConfig) -> (f64, f64, f64) {
    let u = config.units();
    (f64::from(u.area_quarters) / 4.0, f64::from(u.perimeter_halves) / 2.0, f64::from(u.euler_quarters) / 4.0)
}

/// Unscaled functionals in exact integer units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MinkowskiCounts {
    /// Sum of window area scores in quarter pixels (= 4 × black cells).
    pub area_quarters: u64,
    /// Sum of window perimeter scores in half edges (= 2 × black–white adjacencies).
    pub perimeter_halves: u64,
    /// Sum of window Euler scores in quarters.
    pub euler_quarters: i64,
}

impl MinkowskiCounts {
    pub fn black_cells(&self) -> u64 {
        self.area_quarters / 4
    }

    pub fn perimeter_edges(&self) -> u64 {
        self.perimeter_halves / 2
    }

    /// Scales by `1/m`.
    pub fn scaled(&self, m: usize) -> MinkowskiTriple {
        let m = m as f64;
        MinkowskiTriple {
            area: self.area_quarters as f64 / (4.0 * m),
            perimeter: self.perimeter_halves as f64 / (2.0 * m),
            euler: self.euler_quarters as f64 / (4.0 * m),
        }
    }
}

impl Add for MinkowskiCounts {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        MinkowskiCounts {
            area_quarters: self.area_quarters + rhs.area_quarters,
            perimeter_halves: self.perimeter_halves + rhs.perimeter_halves,
            euler_quarters: self.euler_quarters + rhs.euler_quarters,
        }
    }
}

impl AddAssign for MinkowskiCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl core::iter::Sum for MinkowskiCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Scaled functionals `(A_{m,c}, P_{m,c}, χ_{m,c})`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinkowskiTriple {
    pub area: f64,
    pub perimeter: f64,
    pub euler: f64,
}

impl MinkowskiTriple {
    pub fn to_array(self) -> [f64; 3] {
        [self.area, self.perimeter, self.euler]
    }
}

/// Scans windows whose top row lies in `rows` (a sub-range of `0..=m`).
///
/// Splitting `0..m+1` into bands and summing the results gives the same
/// counts as [`scan`].
pub fn scan_rows(image: &BinaryImage, rows: Range<usize>) -> MinkowskiCounts {
    let m = image.m();
    assert!(rows.end <= m + 1, "row band {rows:?} exceeds 0..={m}");
    let mut hist = [0u64; 16];
    for i in rows {
        let top = image.row(i);
        let bottom = image.row(i + 1);
        let mut left = (u8::from(top[0]) << 1) | u8::from(bottom[0]);
        for j in 1..=m + 1 {
            let right = (u8::from(top[j]) << 1) | u8::from(bottom[j]);
            // left column supplies TL/BL, right column TR/BR
            let c = ((left & 2) << 2) | ((right & 2) << 1) | ((left & 1) << 1) | (right & 1);
            hist[usize::from(c)] += 1;
            left = right;
        }
    }
    counts_from_histogram(&hist)
}

/// Tallies window configurations; entry `k` counts windows with index `k + 1`.
pub fn configuration_histogram(image: &BinaryImage) -> [u64; 16] {
    let m = image.m();
    let mut hist = [0u64; 16];
    for i in 0..=m {
        for j in 0..=m {
            let c = code(image.get(i, j), image.get(i, j + 1), image.get(i + 1, j), image.get(i + 1, j + 1));
            hist[usize::from(c)] += 1;
        }
    }
    hist
}

fn counts_from_histogram(hist: &[u64; 16]) -> MinkowskiCounts {
    let mut out = MinkowskiCounts::default();
    for (n, u) in hist.iter().zip(LOOKUP_UNITS.iter()) {
        out.area_quarters += n * u64::from(u.area_quarters);
        out.perimeter_halves += n * u64::from(u.perimeter_halves);
        out.euler_quarters += *n as i64 * i64::from(u.euler_quarters);
    }
    out
}

/// Look-up-table sums over all `(m+1)²` windows, in integer units.
pub fn scan(image: &BinaryImage) -> MinkowskiCounts {
    scan_rows(image, 0..image.m() + 1)
}

/// Scaled area, perimeter and Euler characteristic of the image.
pub fn functionals(image: &BinaryImage) -> MinkowskiTriple {
    scan(image).scaled(image.m())
}

/// Perimeter in edges as `Σ ψ(Z_{i,j})` over interior cells, where `ψ` counts
/// the white 4-neighbors of a black cell (border cells included).
pub fn perimeter_psi_edges(image: &BinaryImage) -> u64 {
    let m = image.m();
    let mut total = 0u64;
    for i in 1..=m {
        for j in 1..=m {
            if image.get(i, j) {
                let black_neighbors = u64::from(image.get(i - 1, j))
                    + u64::from(image.get(i + 1, j))
                    + u64::from(image.get(i, j - 1))
                    + u64::from(image.get(i, j + 1));
                total += 4 - black_neighbors;
            }
        }
    }
    total
}

/// `(1/m) Σ ψ(Z_{i,j})`.
pub fn perimeter_psi(image: &BinaryImage) -> f64 {
    perimeter_psi_edges(image) as f64 / image.m() as f64
}

/// Euler characteristic in quarters from the degree-4 polynomial in the
/// window cells, summed over all `(m+1)²` windows.
pub fn euler_poly_quarters(image: &BinaryImage) -> i64 {
    let m = image.m();
    let mut total = 0i64;
    for i in 0..=m {
        for j in 0..=m {
            let a = i64::from(image.get(i, j));
            let b = i64::from(image.get(i, j + 1));
            let c = i64::from(image.get(i + 1, j));
            let d = i64::from(image.get(i + 1, j + 1));
            let singles = a + b + c + d;
            let adjacent = a * c + a * b + b * d + c * d;
            let diagonal = a * d + b * c;
            let triples = a * b * c + a * b * d + a * c * d + b * c * d;
            let quad = a * b * c * d;
            // 4 × (Σz/4 − ½(adjacent + 2·diagonal) + triples − quad)
            total += singles - 2 * (adjacent + 2 * diagonal) + 4 * triples - 4 * quad;
        }
    }
    total
}

/// `(1/m) ×` the polynomial Euler characteristic.
pub fn euler_poly(image: &BinaryImage) -> f64 {
    euler_poly_quarters(image) as f64 / (4.0 * image.m() as f64)
}
