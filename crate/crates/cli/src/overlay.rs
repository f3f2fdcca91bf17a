//! Box overlays, one panel per tier.

use plateloc::{PixelBox, Tier};

pub fn tier_color(tier: Tier) -> [u8; 3] {
    match tier {
        Tier::B1 => [0, 255, 255],
        Tier::B2 => [0, 255, 0],
        Tier::B3 => [255, 0, 0],
    }
}

/// Line width in pixels.
pub fn tier_thickness(tier: Tier) -> usize {
    match tier {
        Tier::B1 => 1,
        Tier::B2 => 2,
        Tier::B3 => 3,
    }
}

/// Draws each box outline into an RGB8 buffer, growing inward from the box
/// edge. Boxes thinner than the line are filled.
pub fn draw_boxes(rgb8: &mut [u8], width: usize, height: usize, boxes: &[PixelBox], tier: Tier) {
    let color = tier_color(tier);
    let t = tier_thickness(tier);
    let mut put = |x: usize, y: usize| {
        if x < width && y < height {
            let k = 3 * (y * width + x);
            rgb8[k..k + 3].copy_from_slice(&color);
        }
    };
    for b in boxes {
        for y in b.y_min..=b.y_max {
            for x in b.x_min..=b.x_max {
                let edge = x - b.x_min < t || b.x_max - x < t || y - b.y_min < t || b.y_max - y < t;
                if edge {
                    put(x, y);
                }
            }
        }
    }
}
