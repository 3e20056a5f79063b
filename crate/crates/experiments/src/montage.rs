//! Image grids written as binary PGM (P5) plus a CSV naming each tile.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use willshaw::image::GrayImage;

pub const SEPARATOR: usize = 2;
const SEPARATOR_SHADE: u8 = 128;

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Tile {
    pub index: usize,
    pub row: usize,
    pub col: usize,
    pub name: String,
}

/// Row-major grid of equally sized grayscale tiles.
#[derive(Debug, Clone)]
pub struct Montage {
    tile_w: usize,
    tile_h: usize,
    cols: usize,
    scale: usize,
    tiles: Vec<Option<Vec<u8>>>,
    names: Vec<String>,
}

impl Montage {
    pub fn new(tile_w: usize, tile_h: usize, cols: usize, scale: usize) -> Self {
        assert!(tile_w > 0 && tile_h > 0 && cols > 0 && scale > 0);
        Self {
            tile_w,
            tile_h,
            cols,
            scale,
            tiles: Vec::new(),
            names: Vec::new(),
        }
    }

    /// Appends a tile; `None` leaves a black placeholder.
    pub fn push(&mut self, name: impl Into<String>, image: Option<&GrayImage<f32>>) {
        let tile = image.map(|img| {
            assert_eq!((img.width(), img.height()), (self.tile_w, self.tile_h));
            img.to_u8()
        });
        self.tiles.push(tile);
        self.names.push(name.into());
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn dimensions(&self) -> (usize, usize) {
        let rows = self.tiles.len().div_ceil(self.cols).max(1);
        let cols = self.cols.min(self.tiles.len()).max(1);
        let w = cols * self.tile_w * self.scale + (cols - 1) * SEPARATOR;
        let h = rows * self.tile_h * self.scale + (rows - 1) * SEPARATOR;
        (w, h)
    }

    pub fn render(&self) -> Vec<u8> {
        let (w, h) = self.dimensions();
        let mut px = vec![SEPARATOR_SHADE; w * h];
        let (tw, th) = (self.tile_w * self.scale, self.tile_h * self.scale);
        for (t, tile) in self.tiles.iter().enumerate() {
            let x0 = (t % self.cols) * (tw + SEPARATOR);
            let y0 = (t / self.cols) * (th + SEPARATOR);
            for y in 0..th {
                for x in 0..tw {
                    let v = tile
                        .as_ref()
                        .map_or(0, |p| p[(y / self.scale) * self.tile_w + x / self.scale]);
                    px[(y0 + y) * w + x0 + x] = v;
                }
            }
        }
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        out.extend(px);
        out
    }

    pub fn tiles(&self) -> Vec<Tile> {
        self.names
            .iter()
            .enumerate()
            .map(|(index, name)| Tile {
                index,
                row: index / self.cols,
                col: index % self.cols,
                name: name.clone(),
            })
            .collect()
    }

    /// Writes `<stem>.pgm` and `<stem>.tiles.csv` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> io::Result<()> {
        let mut f = BufWriter::new(File::create(dir.join(format!("{stem}.pgm")))?);
        f.write_all(&self.render())?;
        f.flush()?;
        crate::output::write_records(
            &dir.join(format!("{stem}.tiles.csv")),
            &["index", "row", "col", "name"],
            &self.tiles(),
        )
        .map_err(io::Error::other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_header() {
        let img = GrayImage::new(2, 2, vec![1.0f32, 0.0, 0.0, 1.0]).unwrap();
        let mut m = Montage::new(2, 2, 2, 1);
        m.push("a", Some(&img));
        m.push("b", None);
        m.push("c", Some(&img));
        // 2 columns of 2px + one 2px gap; 2 rows likewise
        assert_eq!(m.dimensions(), (6, 6));
        let bytes = m.render();
        let header = b"P5\n6 6\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        let px = &bytes[header.len()..];
        assert_eq!(px.len(), 36);
        assert_eq!(&px[0..6], &[255, 0, 128, 128, 0, 0]);
        assert_eq!(&px[12..18], &[128; 6]);
        assert_eq!(px[4 * 6], 255);
        assert_eq!(m.tiles()[2], Tile { index: 2, row: 1, col: 0, name: "c".into() });
    }

    #[test]
    fn upscaling_repeats_pixels() {
        let img = GrayImage::new(1, 1, vec![1.0f32]).unwrap();
        let mut m = Montage::new(1, 1, 1, 3);
        m.push("x", Some(&img));
        let bytes = m.render();
        assert!(bytes.ends_with(&[255; 9]));
    }
}
