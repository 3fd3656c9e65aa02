//! Domain types shared by every structure: colors, weights, points,
//! query boxes and the answer representation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense color id in `[0, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ColorId(pub u32);

impl ColorId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A commutative monoid of point weights.
///
/// `combine` must be associative and commutative with `identity()` as its
/// neutral element. Weights that also form a group implement `difference`,
/// which unlocks the prefix-difference interval path.
pub trait Weight: Copy + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn identity() -> Self;

    fn combine(self, other: Self) -> Self;

    /// `self - other`, or `None` when the monoid has no inverse.
    fn difference(self, _other: Self) -> Option<Self> {
        None
    }

    fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    fn invertible() -> bool {
        Self::identity().difference(Self::identity()).is_some()
    }
}

/// Weights that can be read from and written to the text formats.
pub trait TextWeight: Weight + FromStr + fmt::Display {
    /// Weight assumed when a dataset line omits the weight column.
    fn default_point() -> Self;
}

/// Plain counting: non-negative integers under addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Count(pub u64);

impl Weight for Count {
    #[inline]
    fn identity() -> Self {
        Count(0)
    }

    #[inline]
    fn combine(self, other: Self) -> Self {
        Count(self.0 + other.0)
    }

    #[inline]
    fn difference(self, other: Self) -> Option<Self> {
        self.0.checked_sub(other.0).map(Count)
    }
}

impl TextWeight for Count {
    fn default_point() -> Self {
        Count(1)
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Count {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.parse::<u64>() {
            Ok(0) => Err("count weights must be positive".to_string()),
            Ok(v) => Ok(Count(v)),
            Err(e) => Err(format!("invalid count weight {s:?}: {e}")),
        }
    }
}

/// Integers under `max`: a semigroup with no inverse, used to exercise the
/// subtraction-free query paths. `i64::MIN` acts as the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MaxWeight(pub i64);

impl Weight for MaxWeight {
    #[inline]
    fn identity() -> Self {
        MaxWeight(i64::MIN)
    }

    #[inline]
    fn combine(self, other: Self) -> Self {
        MaxWeight(self.0.max(other.0))
    }
}

impl TextWeight for MaxWeight {
    fn default_point() -> Self {
        MaxWeight(1)
    }
}

impl fmt::Display for MaxWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for MaxWeight {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.parse::<i64>() {
            Ok(i64::MIN) => Err("i64::MIN is reserved as the max identity".to_string()),
            Ok(v) => Ok(MaxWeight(v)),
            Err(e) => Err(format!("invalid max weight {s:?}: {e}")),
        }
    }
}

/// A point in ℝᵈ carrying a color and a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredPoint<W> {
    pub coords: Vec<f64>,
    pub color: ColorId,
    pub weight: W,
}

impl<W: Weight> ColoredPoint<W> {
    pub fn new(coords: Vec<f64>, color: ColorId, weight: W) -> Self {
        ColoredPoint {
            coords,
            color,
            weight,
        }
    }
}

impl ColoredPoint<Count> {
    pub fn counted(coords: Vec<f64>, color: u32) -> Self {
        ColoredPoint::new(coords, ColorId(color), Count(1))
    }
}

/// Checks that every point has `dims` finite coordinates and a weight that
/// is not the identity.
pub fn validate_points<W: Weight>(points: &[ColoredPoint<W>], dims: usize) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        if p.coords.len() != dims {
            return Err(Error::MalformedInput(format!(
                "point {i} has {} coordinates, expected {dims}",
                p.coords.len()
            )));
        }
        if p.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedInput(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        if p.weight.is_identity() {
            return Err(Error::MalformedInput(format!(
                "point {i} carries the identity weight"
            )));
        }
    }
    Ok(())
}

/// Number of colors needed to address every point's color.
pub fn color_count<W>(points: &[ColoredPoint<W>]) -> usize {
    points
        .iter()
        .map(|p| p.color.index() + 1)
        .max()
        .unwrap_or(0)
}

/// Closed range on one axis; `lo` may be `-inf`, `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const FULL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn at_most(hi: f64) -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi,
        }
    }

    pub fn at_least(lo: f64) -> Self {
        Interval {
            lo,
            hi: f64::INFINITY,
        }
    }

    pub fn has_lo(&self) -> bool {
        self.lo.is_finite()
    }

    pub fn has_hi(&self) -> bool {
        self.hi.is_finite()
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Axis-aligned query box with closed bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxQuery {
    pub bounds: Vec<Interval>,
}

impl BoxQuery {
    pub fn new(bounds: Vec<Interval>) -> Self {
        BoxQuery { bounds }
    }

    /// `(-inf, c_1] x ... x (-inf, c_d]`.
    pub fn dominance(corner: &[f64]) -> Self {
        BoxQuery {
            bounds: corner.iter().map(|&c| Interval::at_most(c)).collect(),
        }
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    /// Number of finite bounds.
    pub fn sidedness(&self) -> usize {
        self.bounds
            .iter()
            .map(|b| b.has_lo() as usize + b.has_hi() as usize)
            .sum()
    }

    /// True when no axis carries a finite lower bound.
    pub fn is_dominance(&self) -> bool {
        self.bounds.iter().all(|b| !b.has_lo())
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        self.bounds
            .iter()
            .zip(coords)
            .all(|(b, &c)| b.contains(c))
    }

    pub fn validate(&self) -> Result<()> {
        for (axis, b) in self.bounds.iter().enumerate() {
            if b.lo.is_nan() || b.hi.is_nan() {
                return Err(Error::MalformedQuery(format!("axis {axis}: NaN bound")));
            }
            if b.lo == f64::INFINITY || b.hi == f64::NEG_INFINITY {
                return Err(Error::MalformedQuery(format!(
                    "axis {axis}: lower bound may only be -inf and upper bound only +inf"
                )));
            }
            if b.lo > b.hi {
                return Err(Error::MalformedQuery(format!(
                    "axis {axis}: lower bound {} exceeds upper bound {}",
                    b.lo, b.hi
                )));
            }
        }
        Ok(())
    }
}

/// Reflects the flagged axes (`x -> -x`) so a lower-bounded side becomes an
/// upper-bounded one. Answers on reflected data equal answers on the
/// original data.
pub fn normalize_query(q: &BoxQuery, reflect: &[bool]) -> Result<BoxQuery> {
    q.validate()?;
    if reflect.len() != q.dims() {
        return Err(Error::DimensionMismatch {
            expected: q.dims(),
            got: reflect.len(),
        });
    }
    let bounds = q
        .bounds
        .iter()
        .zip(reflect)
        .map(|(b, &r)| if r { Interval::new(-b.hi, -b.lo) } else { *b })
        .collect();
    Ok(BoxQuery { bounds })
}

/// Which sides of an axis a structure can bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `(-inf, x]`
    Upper,
    /// `[x, +inf)`
    Lower,
    /// `[x1, x2]`
    Both,
}

impl Side {
    pub fn supports(self, b: &Interval) -> bool {
        match self {
            Side::Upper => !b.has_lo(),
            Side::Lower => !b.has_hi(),
            Side::Both => true,
        }
    }

    /// Narrowest side that supports every query in `queries` on `axis`.
    pub fn required(queries: &[BoxQuery], axis: usize) -> Side {
        let lo = queries.iter().any(|q| q.bounds[axis].has_lo());
        let hi = queries.iter().any(|q| q.bounds[axis].has_hi());
        match (lo, hi) {
            (true, true) => Side::Both,
            (true, false) => Side::Lower,
            _ => Side::Upper,
        }
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "u" | "upper" => Ok(Side::Upper),
            "l" | "lower" => Ok(Side::Lower),
            "b" | "both" => Ok(Side::Both),
            other => Err(format!("unknown side {other:?} (expected upper, lower or both)")),
        }
    }
}

/// Parses a comma separated per-axis side list such as `both,upper`.
pub fn parse_sides(s: &str) -> std::result::Result<Vec<Side>, String> {
    s.split(',').map(str::parse).collect()
}

/// The answer to one query: distinct colors with their combined weight.
///
/// Equality is multiset equality; the entry order carries no meaning.
#[derive(Debug, Clone, Default)]
pub struct FrequencyList<W> {
    entries: Vec<(ColorId, W)>,
}

impl<W: Weight> FrequencyList<W> {
    pub fn new() -> Self {
        FrequencyList {
            entries: Vec::new(),
        }
    }

    pub fn from_entries(entries: Vec<(ColorId, W)>) -> Self {
        FrequencyList { entries }
    }

    pub fn entries(&self) -> &[(ColorId, W)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(ColorId, W)> {
        self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &(ColorId, W)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, color: ColorId) -> Option<W> {
        self.entries
            .iter()
            .find(|(c, _)| *c == color)
            .map(|&(_, w)| w)
    }

    /// Entries sorted by color id.
    pub fn sorted(&self) -> Vec<(ColorId, W)> {
        let mut e = self.entries.clone();
        e.sort_by_key(|&(c, _)| c);
        e
    }

    /// Distinct colors and no identity weights.
    pub fn is_well_formed(&self) -> bool {
        let mut colors: Vec<ColorId> = self.entries.iter().map(|&(c, _)| c).collect();
        colors.sort_unstable();
        colors.windows(2).all(|w| w[0] != w[1]) && self.entries.iter().all(|(_, w)| !w.is_identity())
    }
}

impl FrequencyList<Count> {
    /// Sum of all reported counts.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, w)| w.0).sum()
    }
}

impl<W: Weight> PartialEq for FrequencyList<W> {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.sorted() == other.sorted()
    }
}

impl<W: Weight> FromIterator<(ColorId, W)> for FrequencyList<W> {
    fn from_iter<I: IntoIterator<Item = (ColorId, W)>>(iter: I) -> Self {
        FrequencyList {
            entries: iter.into_iter().collect(),
        }
    }
}

/// Total order on finite coordinates.
#[inline]
pub(crate) fn cmp_coord(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}
