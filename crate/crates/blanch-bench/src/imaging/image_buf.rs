use super::ImagingError;
use std::path::Path;

/// Interleaved 8-bit image, normally 3-channel RGB. The channel count is
/// carried explicitly so malformed sources surface as errors instead of
/// being silently reinterpreted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbFrame {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl RgbFrame {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<u8>,
    ) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(ImagingError::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}x{channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(ImagingError::InvalidParameter(format!(
                "expected {} bytes for {width}x{height}x{channels}, got {}",
                width * height * channels,
                data.len()
            )));
        }
        Ok(RgbFrame {
            width,
            height,
            channels,
            data,
        })
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

    pub fn get(&self, x: usize, y: usize, channel: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + channel]
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Decodes a PNG, requiring plain 8-bit RGB content.
    pub fn read_png(path: &Path) -> Result<Self, ImagingError> {
        let dynamic = image::ImageReader::open(path)?.decode()?;
        match dynamic {
            image::DynamicImage::ImageRgb8(img) => {
                let (w, h) = (img.width() as usize, img.height() as usize);
                RgbFrame::new(w, h, 3, img.into_raw())
            }
            other => Err(ImagingError::WrongChannelCount {
                got: other.color().channel_count() as usize,
            }),
        }
    }

    pub fn write_png(&self, path: &Path) -> Result<(), ImagingError> {
        if self.channels != 3 {
            return Err(ImagingError::WrongChannelCount { got: self.channels });
        }
        let img = image::RgbImage::from_raw(
            self.width as u32,
            self.height as u32,
            self.data.clone(),
        )
        .expect("dimensions validated at construction");
        img.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }
}

/// Real-valued single-channel image used for phase means and change maps.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidParameter(
                "image dimensions must be positive".into(),
            ));
        }
        if data.len() != width * height {
            return Err(ImagingError::InvalidParameter(format!(
                "expected {} values for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self, ImagingError> {
        GrayImage::new(width, height, vec![0.0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Bilinear sample at fractional pixel coordinates, `None` outside
    /// `[0, width-1] x [0, height-1]`.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        if !(x >= 0.0 && y >= 0.0 && x <= (self.width - 1) as f64 && y <= (self.height - 1) as f64)
        {
            return None;
        }
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let bottom = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        Some(top * (1.0 - fy) + bottom * fy)
    }
}
