//! Planar image and kernel grids.

use crate::error::{Error, Result};

/// Real-valued image stored row-major, channels planar.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::Dimension(format!(
                "image dimensions must be positive, got {width}x{height}x{channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::Dimension(format!(
                "data length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite pixel value {v}")));
        }
        Ok(Self { width, height, channels, data })
    }

    pub(crate) fn from_raw(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        Self { width, height, channels, data }
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self::from_raw(width, height, channels, vec![0.0; width * height * channels])
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::from_raw(width, height, 1, vec![value; width * height])
    }

    /// Single-channel image from a function of (x, y).
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_raw(width, height, 1, data)
    }

    /// A 1D signal as a 1×N image.
    pub fn from_signal(signal: &[f64]) -> Self {
        Self::from_raw(signal.len(), 1, 1, signal.to_vec())
    }

    /// Stacks single-channel planes into one multi-channel image.
    pub fn from_channels(planes: &[Image]) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::InvalidArgument("no channels given".into()))?;
        let mut data = Vec::with_capacity(first.width * first.height * planes.len());
        for p in planes {
            if p.width != first.width || p.height != first.height || p.channels != 1 {
                return Err(Error::Dimension("channel planes differ in size".into()));
            }
            data.extend_from_slice(&p.data);
        }
        Ok(Self::from_raw(first.width, first.height, planes.len(), data))
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn len(&self) -> usize {
        self.data.len()
    }
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
    pub fn plane_len(&self) -> usize {
        self.width * self.height
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
    pub fn get_c(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[c * self.plane_len() + y * self.width + x]
    }
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        let w = self.width;
        self.data[y * w + x] = v;
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }
    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.plane_len();
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Copies one channel out as a single-channel image.
    pub fn channel(&self, c: usize) -> Image {
        Self::from_raw(self.width, self.height, 1, self.plane(c).to_vec())
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Image> {
        if x0 + width > self.width || y0 + height > self.height || width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "crop {width}x{height}+{x0}+{y0} outside {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height * self.channels);
        for c in 0..self.channels {
            let p = self.plane(c);
            for y in y0..y0 + height {
                data.extend_from_slice(&p[y * self.width + x0..y * self.width + x0 + width]);
            }
        }
        Ok(Self::from_raw(width, height, self.channels, data))
    }

    /// Central crop removing `px` columns and `py` rows on each side.
    pub fn crop_border(&self, px: usize, py: usize) -> Result<Image> {
        if 2 * px >= self.width || 2 * py >= self.height {
            return Err(Error::Dimension("border larger than image".into()));
        }
        self.crop(px, py, self.width - 2 * px, self.height - 2 * py)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Self::from_raw(self.width, self.height, self.channels, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Image) -> f64 {
        debug_assert!(self.same_shape(other));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Image) {
        debug_assert!(self.same_shape(other));
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn sub(&self, other: &Image) -> Image {
        debug_assert!(self.same_shape(other));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self::from_raw(self.width, self.height, self.channels, data)
    }

    pub fn scale(&self, a: f64) -> Image {
        self.map(|v| a * v)
    }

    pub fn sq_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Pads by `px`/`py` on each side using the given rule for out-of-range reads.
    pub fn pad(&self, px: usize, py: usize, mode: BoundaryMode) -> Result<Image> {
        crate::conv::pad(self, px, py, mode)
    }
}

/// Blur kernel with odd dimensions, stored row-major.
///
/// Orientation: `convolve_valid(u, k)[y][x] = Σ u[y+r][x+c] · k[r][c]`, i.e. the stored
/// array multiplies the image window directly. The mathematical convolution kernel is
/// its 180° rotation.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Kernel {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "kernel dimensions must be odd and positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "kernel data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite kernel value {v}")));
        }
        Ok(Self { width, height, data })
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert!(width % 2 == 1 && height % 2 == 1 && data.len() == width * height);
        Self { width, height, data }
    }

    /// Horizontal 1×N kernel from taps.
    pub fn from_taps(taps: &[f64]) -> Result<Self> {
        Self::new(taps.len(), 1, taps.to_vec())
    }

    pub fn delta(width: usize, height: usize) -> Result<Self> {
        let mut k = Self::new(width, height, vec![0.0; width * height])?;
        let c = k.center_index();
        k.data[c] = 1.0;
        Ok(k)
    }

    pub fn uniform(width: usize, height: usize) -> Result<Self> {
        let n = (width * height) as f64;
        Self::new(width, height, vec![1.0 / n; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn len(&self) -> usize {
        self.data.len()
    }
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
    pub fn center_index(&self) -> usize {
        (self.height / 2) * self.width + self.width / 2
    }
    pub fn center(&self) -> f64 {
        self.data[self.center_index()]
    }
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
    pub fn l1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    /// Nonnegative and summing to one within `tol`.
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.data.iter().all(|&v| v >= 0.0) && (self.sum() - 1.0).abs() <= tol
    }

    pub fn scale(&self, a: f64) -> Kernel {
        Self::from_raw(self.width, self.height, self.data.iter().map(|v| a * v).collect())
    }

    pub fn max_abs_diff(&self, other: &Kernel) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn as_image(&self) -> Image {
        Image::from_raw(self.width, self.height, 1, self.data.clone())
    }

    pub fn from_image(img: &Image) -> Result<Self> {
        if img.channels() != 1 {
            return Err(Error::Dimension("kernel image must have one channel".into()));
        }
        Self::new(img.width(), img.height(), img.data().to_vec())
    }

    /// Embeds the kernel, shifted by (dx, dy), into a larger zero canvas of odd size.
    /// Mass falling outside the canvas is dropped.
    pub fn shifted_into(&self, width: usize, height: usize, dx: isize, dy: isize) -> Kernel {
        let mut out = vec![0.0; width * height];
        let ox = (width as isize - self.width as isize) / 2 + dx;
        let oy = (height as isize - self.height as isize) / 2 + dy;
        for y in 0..self.height {
            for x in 0..self.width {
                let tx = x as isize + ox;
                let ty = y as isize + oy;
                if tx >= 0 && ty >= 0 && (tx as usize) < width && (ty as usize) < height {
                    out[ty as usize * width + tx as usize] = self.get(x, y);
                }
            }
        }
        Kernel::from_raw(width, height, out)
    }
}

/// How a convolution treats reads outside the image support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    /// No assumption: output is the valid region only.
    ValidFree,
    /// Mirror with the edge sample repeated (`cba|abcd|dcb`).
    Symmetric,
    /// Wrap around.
    Periodic,
    /// Repeat the edge sample.
    Replicate,
}

impl BoundaryMode {
    pub const ALL: [BoundaryMode; 4] =
        [BoundaryMode::ValidFree, BoundaryMode::Symmetric, BoundaryMode::Periodic, BoundaryMode::Replicate];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryMode::ValidFree => "free",
            BoundaryMode::Symmetric => "symmetric",
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Replicate => "replicate",
        }
    }
}

impl std::str::FromStr for BoundaryMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" | "valid" | "valid_free" => Ok(BoundaryMode::ValidFree),
            "symmetric" => Ok(BoundaryMode::Symmetric),
            "periodic" => Ok(BoundaryMode::Periodic),
            "replicate" => Ok(BoundaryMode::Replicate),
            _ => Err(Error::Parse(format!("unknown boundary mode '{s}'"))),
        }
    }
}

impl std::fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
