//! NEQR encoding: preparation circuits and readout of segmented images.
//!
//! The prepared state is `2^-n Σ |C(Y,X)⟩|Y⟩|X⟩` with every ancilla in `|0⟩`.
//! Each set gray bit of each pixel is written by one multi-controlled NOT
//! whose control polarities spell out the pixel's position label.

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Control, GateOp, RegisterLayout};
use crate::cost::PREP_STAGE;
use crate::image::{ImageError, ImageGray};
use crate::tracked::BranchMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NeqrError {
    #[error("layout is sized for q={layout_q}, n={layout_n} but the image has q={image_q}, n={image_n}")]
    LayoutMismatch { layout_q: usize, layout_n: usize, image_q: usize, image_n: usize },
    #[error("no branch carries position {0:#b}")]
    MissingPosition(u64),
    #[error("position {0:#b} appears in more than one branch")]
    DuplicatePosition(u64),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Image(#[from] ImageError),
}

fn check_layout(image_q: usize, image_n: usize, layout: &RegisterLayout) -> Result<(), NeqrError> {
    if layout.q() != image_q || layout.n() != image_n {
        return Err(NeqrError::LayoutMismatch {
            layout_q: layout.q(),
            layout_n: layout.n(),
            image_q,
            image_n,
        });
    }
    Ok(())
}

/// Controls that fire exactly on position label `position`.
pub fn position_controls(layout: &RegisterLayout, position: u64) -> Vec<Control> {
    let bits = layout.position().len();
    layout
        .position()
        .iter()
        .enumerate()
        .map(|(i, &q)| Control::on(q, (position >> (bits - 1 - i)) & 1 == 1))
        .collect()
}

/// Builds the `prep` stage encoding `image` into `layout`.
pub fn build_preparation(image: &ImageGray, layout: &RegisterLayout) -> Result<Circuit, NeqrError> {
    check_layout(image.q(), image.n(), layout)?;
    let mut c = Circuit::with_layout(layout.clone());
    c.begin_stage(PREP_STAGE)?;
    for &q in layout.position() {
        c.push(GateOp::h(q))?;
    }
    let depth = layout.q();
    for (pos, &value) in image.pixels().iter().enumerate() {
        if value == 0 {
            continue;
        }
        let controls = position_controls(layout, pos as u64);
        for (i, &target) in layout.color().iter().enumerate() {
            if (value >> (depth - 1 - i)) & 1 == 1 {
                c.push(GateOp::controlled_x(controls.clone(), target))?;
            }
        }
    }
    Ok(c)
}

/// Reads pixel `(Y, X)` from the color field of the branch tagged `Y ∥ X`.
pub fn decode(map: &BranchMap, layout: &RegisterLayout) -> Result<ImageGray, NeqrError> {
    let count = 1usize << layout.position().len();
    let mut pixels: Vec<Option<u32>> = vec![None; count];
    for b in map.branches() {
        let pos = RegisterLayout::read_register(layout.position(), b.bits);
        let color = RegisterLayout::read_register(layout.color(), b.bits) as u32;
        if pixels[pos as usize].replace(color).is_some() {
            return Err(NeqrError::DuplicatePosition(pos));
        }
    }
    let pixels = pixels
        .into_iter()
        .enumerate()
        .map(|(pos, v)| v.ok_or(NeqrError::MissingPosition(pos as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ImageGray::new(layout.n(), layout.q(), pixels)?)
}
