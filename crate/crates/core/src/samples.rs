//! Small reference images used by tests, benches and the README.

use crate::image::ImageGray;

/// 2×2, 8-bit: gray levels 0, 100, 200, 255 in row-major order.
pub fn four_level_2x2() -> ImageGray {
    ImageGray::new(1, 8, vec![0, 100, 200, 255]).expect("valid image")
}

/// 4×4, 3-bit demo image segmented with thresholds 2 and 4.
pub fn demo_4x4() -> ImageGray {
    #[rustfmt::skip]
    let pixels = vec![
        3, 2, 3, 2,
        2, 3, 0, 1,
        0, 5, 0, 5,
        0, 5, 5, 7,
    ];
    ImageGray::new(2, 3, pixels).expect("valid image")
}
