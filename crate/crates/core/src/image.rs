//! Square gray-scale images and plain (P2) PGM I/O.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("expected {expected} pixels for a {side}x{side} image, got {got}")]
    PixelCount { expected: usize, got: usize, side: usize },
    #[error("pixel {index} has value {value}, exceeding {max} for {q}-bit gray levels")]
    ValueTooLarge { index: usize, value: u32, max: u32, q: usize },
    #[error("gray depth must be between 1 and 16 bits, got {0}")]
    Depth(usize),
    #[error("image must be square with a power-of-two side, got {width}x{height}")]
    Dimensions { width: usize, height: usize },
    #[error("maxval {0} is not of the form 2^q - 1")]
    MaxVal(u32),
    #[error("malformed PGM: {0}")]
    Malformed(String),
}

/// A `2^n × 2^n` image with `q`-bit gray levels, stored row-major.
///
/// Pixel `(y, x)` sits at index `y · 2^n + x`, which is also its NEQR
/// position label `Y ∥ X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageGray {
    n: usize,
    q: usize,
    pixels: Vec<u32>,
}

impl ImageGray {
    pub fn new(n: usize, q: usize, pixels: Vec<u32>) -> Result<Self, ImageError> {
        if !(1..=16).contains(&q) {
            return Err(ImageError::Depth(q));
        }
        let side = 1usize << n;
        if pixels.len() != side * side {
            return Err(ImageError::PixelCount { expected: side * side, got: pixels.len(), side });
        }
        let max = (1u32 << q) - 1;
        if let Some((index, &value)) = pixels.iter().enumerate().find(|(_, &v)| v > max) {
            return Err(ImageError::ValueTooLarge { index, value, max, q });
        }
        Ok(ImageGray { n, q, pixels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn max_value(&self) -> u32 {
        (1 << self.q) - 1
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }

    pub fn get(&self, y: usize, x: usize) -> u32 {
        self.pixels[(y << self.n) | x]
    }

    /// Gray value at position label `Y ∥ X`.
    pub fn at_position(&self, position: usize) -> u32 {
        self.pixels[position]
    }

    pub fn map(&self, f: impl Fn(u32) -> u32) -> Result<ImageGray, ImageError> {
        ImageGray::new(self.n, self.q, self.pixels.iter().map(|&v| f(v)).collect())
    }

    /// Parses a plain (P2) PGM. `q` is the bit length of maxval.
    pub fn read_pgm(bytes: &[u8]) -> Result<ImageGray, ImageError> {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| ImageError::Malformed("not ASCII text".into()))?;
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);

        match tokens.next() {
            Some("P2") => {}
            Some(other) => return Err(ImageError::Malformed(format!("bad magic `{other}`"))),
            None => return Err(ImageError::Malformed("empty file".into())),
        }
        let mut header = |what: &str| -> Result<u32, ImageError> {
            let tok = tokens
                .next()
                .ok_or_else(|| ImageError::Malformed(format!("missing {what}")))?;
            tok.parse()
                .map_err(|_| ImageError::Malformed(format!("bad {what} `{tok}`")))
        };
        let width = header("width")? as usize;
        let height = header("height")? as usize;
        let maxval = header("maxval")?;

        if width != height || !width.is_power_of_two() {
            return Err(ImageError::Dimensions { width, height });
        }
        if maxval == 0 || maxval > u16::MAX as u32 || !(maxval + 1).is_power_of_two() {
            return Err(ImageError::MaxVal(maxval));
        }
        let q = (maxval + 1).trailing_zeros() as usize;
        let n = width.trailing_zeros() as usize;

        let pixels = tokens
            .map(|tok| {
                tok.parse::<u32>()
                    .map_err(|_| ImageError::Malformed(format!("bad pixel value `{tok}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        ImageGray::new(n, q, pixels)
    }

    pub fn write_pgm(&self) -> Vec<u8> {
        let side = self.side();
        let mut out = format!("P2\n{side} {side}\n{}\n", self.max_value());
        for row in self.pixels.chunks(side) {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out.into_bytes()
    }
}
