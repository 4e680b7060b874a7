//! Linear-light RGB images and their 8-bit serializations.
//!
//! Pixels stay f64 in [0,1] until the very last step; quantization is
//! round(255·clamp(v)) with no gamma, so identical renders produce
//! byte-identical files.

use crate::math::Rgb;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    /// RGB interleaved, row-major, y = 0 at the top.
    pub data: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32) -> ImageBuffer {
        ImageBuffer {
            width,
            height,
            data: vec![0.0; width as usize * height as usize * 3],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = self.index(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: Rgb) {
        let i = self.index(x, y);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn quantize_channel(v: f64) -> u8 {
        (255.0 * v.clamp(0.0, 1.0)).round() as u8
    }

    /// 8-bit RGB bytes in buffer order; shared by the PPM and PNG writers.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| Self::quantize_channel(v)).collect()
    }

    /// Binary P6 PPM with maxval 255.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.to_rgb8());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_rounds_and_clamps() {
        assert_eq!(ImageBuffer::quantize_channel(0.0), 0);
        assert_eq!(ImageBuffer::quantize_channel(1.0), 255);
        assert_eq!(ImageBuffer::quantize_channel(-0.4), 0);
        assert_eq!(ImageBuffer::quantize_channel(7.0), 255);
        // 0.5·255 = 127.5 rounds away from zero.
        assert_eq!(ImageBuffer::quantize_channel(0.5), 128);
        assert_eq!(ImageBuffer::quantize_channel(1.0 / 255.0), 1);
    }

    #[test]
    fn ppm_bytes_match_golden_layout() {
        let mut img = ImageBuffer::new(2, 1);
        img.set_pixel(0, 0, [1.0, 0.0, 0.0]);
        img.set_pixel(1, 0, [0.0, 0.5, 1.0]);
        let expected = [b"P6\n2 1\n255\n".as_slice(), &[255, 0, 0, 0, 128, 255]].concat();
        assert_eq!(img.to_ppm(), expected);
    }

    #[test]
    fn pixel_accessors_round_trip() {
        let mut img = ImageBuffer::new(3, 2);
        img.set_pixel(2, 1, [0.1, 0.2, 0.3]);
        assert_eq!(img.pixel(2, 1), [0.1, 0.2, 0.3]);
        assert_eq!(img.pixel(0, 0), [0.0; 3]);
        assert_eq!(img.data.len(), 18);
    }
}
