//! RGB to scalar channel conversions.
//!
//! Every channel is mapped onto `0..=255` through a fixed affine map derived
//! from the channel's theoretical range, so planes from different images are
//! directly comparable. Rounding is half-away-from-zero followed by a clamp.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::raster::{RgbImage, ScalarPlane};

/// Scalar channels available to the Otsu stage and the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelId {
    /// YCbCr luma.
    Y,
    Cb,
    Cr,
    /// HSV hue.
    H,
    /// HSV saturation.
    S,
    /// HSV value.
    V,
    /// YIQ in-phase.
    I,
    /// YIQ quadrature.
    Q,
    /// CIE XYZ X.
    X,
    /// CIE XYZ Y (relative luminance).
    Xy,
    /// CIE XYZ Z.
    Z,
    /// CMYK cyan.
    C,
    /// CMYK magenta.
    M,
    /// CMYK yellow.
    Ye,
    /// CMYK key.
    K,
    /// CIE Luv lightness.
    L,
    /// CIE Luv u*.
    U,
    /// CIE Luv v*.
    Vv,
    /// CIE Lab lightness.
    La,
    /// CIE Lab a*.
    A,
    /// CIE Lab b*.
    B,
    /// LCh chroma.
    Ch,
    /// LCh hue.
    Hh,
}

impl ChannelId {
    pub const ALL: [ChannelId; 23] = [
        ChannelId::Y,
        ChannelId::Cb,
        ChannelId::Cr,
        ChannelId::H,
        ChannelId::S,
        ChannelId::V,
        ChannelId::I,
        ChannelId::Q,
        ChannelId::X,
        ChannelId::Xy,
        ChannelId::Z,
        ChannelId::C,
        ChannelId::M,
        ChannelId::Ye,
        ChannelId::K,
        ChannelId::L,
        ChannelId::U,
        ChannelId::Vv,
        ChannelId::La,
        ChannelId::A,
        ChannelId::B,
        ChannelId::Ch,
        ChannelId::Hh,
    ];

    /// Channels fused by the diffusion stage, in the default weight order.
    pub const DIFFUSION_DEFAULT: [ChannelId; 7] = [
        ChannelId::Cb,
        ChannelId::Cr,
        ChannelId::I,
        ChannelId::H,
        ChannelId::U,
        ChannelId::A,
        ChannelId::Ch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelId::Y => "Y",
            ChannelId::Cb => "Cb",
            ChannelId::Cr => "Cr",
            ChannelId::H => "H",
            ChannelId::S => "S",
            ChannelId::V => "V",
            ChannelId::I => "I",
            ChannelId::Q => "Q",
            ChannelId::X => "X",
            ChannelId::Xy => "Xy",
            ChannelId::Z => "Z",
            ChannelId::C => "C",
            ChannelId::M => "M",
            ChannelId::Ye => "Ye",
            ChannelId::K => "K",
            ChannelId::L => "L",
            ChannelId::U => "U",
            ChannelId::Vv => "Vv",
            ChannelId::La => "La",
            ChannelId::A => "A",
            ChannelId::B => "B",
            ChannelId::Ch => "Ch",
            ChannelId::Hh => "Hh",
        }
    }

    /// Converts one pixel to this channel's 8-bit value.
    pub fn value(self, rgb: [u8; 3]) -> u8 {
        match self {
            ChannelId::Y => rgb_to_ycbcr(rgb)[0],
            ChannelId::Cb => rgb_to_ycbcr(rgb)[1],
            ChannelId::Cr => rgb_to_ycbcr(rgb)[2],
            ChannelId::H => to_u8(rgb_to_hsv(rgb).0 * 255.0 / 360.0),
            ChannelId::S => to_u8(rgb_to_hsv(rgb).1 * 255.0),
            ChannelId::V => to_u8(rgb_to_hsv(rgb).2 * 255.0),
            ChannelId::I => {
                let (_, i, _) = rgb_to_yiq(rgb);
                to_u8((i + YIQ_I_MAX) / (2.0 * YIQ_I_MAX) * 255.0)
            }
            ChannelId::Q => {
                let (_, _, q) = rgb_to_yiq(rgb);
                to_u8((q + YIQ_Q_MAX) / (2.0 * YIQ_Q_MAX) * 255.0)
            }
            ChannelId::X => to_u8(rgb_to_xyz(rgb).0 / WHITE[0] * 255.0),
            ChannelId::Xy => to_u8(rgb_to_xyz(rgb).1 / WHITE[1] * 255.0),
            ChannelId::Z => to_u8(rgb_to_xyz(rgb).2 / WHITE[2] * 255.0),
            ChannelId::C => to_u8(rgb_to_cmyk(rgb)[0] * 255.0),
            ChannelId::M => to_u8(rgb_to_cmyk(rgb)[1] * 255.0),
            ChannelId::Ye => to_u8(rgb_to_cmyk(rgb)[2] * 255.0),
            ChannelId::K => to_u8(rgb_to_cmyk(rgb)[3] * 255.0),
            ChannelId::L => to_u8(rgb_to_luv(rgb).0 * 255.0 / 100.0),
            ChannelId::U => to_u8((rgb_to_luv(rgb).1 - LUV_U_MIN) * 255.0 / LUV_U_SPAN),
            ChannelId::Vv => to_u8((rgb_to_luv(rgb).2 - LUV_V_MIN) * 255.0 / LUV_V_SPAN),
            ChannelId::La => to_u8(rgb_to_lab(rgb).0 * 255.0 / 100.0),
            ChannelId::A => to_u8(rgb_to_lab(rgb).1 + 128.0),
            ChannelId::B => to_u8(rgb_to_lab(rgb).2 + 128.0),
            ChannelId::Ch => to_u8(rgb_to_lch(rgb).1),
            ChannelId::Hh => to_u8(rgb_to_lch(rgb).2 * 255.0 / 360.0),
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        ChannelId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown channel {s:?}")))
    }
}

// YIQ extremes: I peaks at pure red / cyan, Q at magenta / green.
const YIQ_I_MAX: f64 = 0.595716;
const YIQ_Q_MAX: f64 = 0.522591;

// 8-bit Luv encoding ranges (u* in [-134, 220], v* in [-140, 122]).
const LUV_U_MIN: f64 = -134.0;
const LUV_U_SPAN: f64 = 354.0;
const LUV_V_MIN: f64 = -140.0;
const LUV_V_SPAN: f64 = 262.0;

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

/// D65 reference white, taken as the matrix row sums so that neutral
/// colors land exactly on the achromatic axis.
const WHITE: [f64; 3] = [
    0.4124564 + 0.3575761 + 0.1804375,
    0.2126729 + 0.7151522 + 0.0721750,
    0.0193339 + 0.1191920 + 0.9503041,
];

const CIE_EPSILON: f64 = 216.0 / 24389.0;
const CIE_KAPPA: f64 = 24389.0 / 27.0;

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Full-range BT.601 (JPEG) conversion.
pub fn rgb_to_ycbcr([r, g, b]: [u8; 3]) -> [u8; 3] {
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    let cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    [to_u8(y), to_u8(cb), to_u8(cr)]
}

/// Hexcone HSV: hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
/// Achromatic pixels have hue and saturation 0.
pub fn rgb_to_hsv([r, g, b]: [u8; 3]) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = max as f64 / 255.0;
    if max == min {
        return (0.0, 0.0, v);
    }
    let delta = (max - min) as f64;
    let s = delta / max as f64;
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let h = if max as f64 == r {
        60.0 * ((g - b) / delta)
    } else if max as f64 == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let h = if h < 0.0 { h + 360.0 } else { h };
    (h, s, v)
}

/// NTSC YIQ on RGB scaled to `[0, 1]`.
pub fn rgb_to_yiq([r, g, b]: [u8; 3]) -> (f64, f64, f64) {
    let (r, g, b) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let i = 0.595716 * r - 0.274453 * g - 0.321263 * b;
    let q = 0.211456 * r - 0.522591 * g + 0.311135 * b;
    (y, i, q)
}

/// Naive CMYK in `[0, 1]`; pure black is `(0, 0, 0, 1)`.
pub fn rgb_to_cmyk([r, g, b]: [u8; 3]) -> [f64; 4] {
    let max = r.max(g).max(b);
    if max == 0 {
        return [0.0, 0.0, 0.0, 1.0];
    }
    let k = 1.0 - max as f64 / 255.0;
    let denom = 1.0 - k;
    let comp = |c: u8| (1.0 - c as f64 / 255.0 - k) / denom;
    [comp(r), comp(g), comp(b), k]
}

#[inline]
fn srgb_to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// CIE XYZ (D65) from gamma-encoded sRGB; Y of white is 1.
pub fn rgb_to_xyz([r, g, b]: [u8; 3]) -> (f64, f64, f64) {
    let lin = [srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b)];
    let row = |m: [f64; 3]| m[0] * lin[0] + m[1] * lin[1] + m[2] * lin[2];
    (row(SRGB_TO_XYZ[0]), row(SRGB_TO_XYZ[1]), row(SRGB_TO_XYZ[2]))
}

#[inline]
fn lab_f(t: f64) -> f64 {
    if t > CIE_EPSILON {
        t.cbrt()
    } else {
        (CIE_KAPPA * t + 16.0) / 116.0
    }
}

/// CIE L*a*b* (D65), unnormalized: L in `[0, 100]`, a/b signed.
pub fn rgb_to_lab(rgb: [u8; 3]) -> (f64, f64, f64) {
    let (x, y, z) = rgb_to_xyz(rgb);
    let fx = lab_f(x / WHITE[0]);
    let fy = lab_f(y / WHITE[1]);
    let fz = lab_f(z / WHITE[2]);
    (116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

/// Cylindrical Lab: `(L, chroma, hue_degrees)`; achromatic hue is 0.
pub fn rgb_to_lch(rgb: [u8; 3]) -> (f64, f64, f64) {
    let (l, a, b) = rgb_to_lab(rgb);
    let c = a.hypot(b);
    if c < 1e-6 {
        return (l, c, 0.0);
    }
    let mut h = b.atan2(a).to_degrees();
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    (l, c, h)
}

/// CIE L*u*v* (D65), unnormalized.
pub fn rgb_to_luv(rgb: [u8; 3]) -> (f64, f64, f64) {
    let (x, y, z) = rgb_to_xyz(rgb);
    let yr = y / WHITE[1];
    let l = if yr > CIE_EPSILON {
        116.0 * yr.cbrt() - 16.0
    } else {
        CIE_KAPPA * yr
    };
    let d = x + 15.0 * y + 3.0 * z;
    if d <= 0.0 {
        return (l, 0.0, 0.0);
    }
    let dn = WHITE[0] + 15.0 * WHITE[1] + 3.0 * WHITE[2];
    let (un, vn) = (4.0 * WHITE[0] / dn, 9.0 * WHITE[1] / dn);
    let (u1, v1) = (4.0 * x / d, 9.0 * y / d);
    (l, 13.0 * l * (u1 - un), 13.0 * l * (v1 - vn))
}

/// Converts every pixel of `img` to the channel `ch`.
pub fn extract_plane(img: &RgbImage, ch: ChannelId) -> ScalarPlane {
    img.map(|&px| ch.value(px))
}

/// Luminance plane used as the edge detector input.
pub fn luminance_gray(img: &RgbImage) -> ScalarPlane {
    extract_plane(img, ChannelId::Y)
}
