//! `DPF1` depth frames: magic, u32 width, u32 height, then width×height
//! little-endian f32 depths in meters, row-major.

use std::io::{Read, Write};

use super::{DepthFrame, MapperError};

pub const DEPTH_MAGIC: &[u8; 4] = b"DPF1";

pub fn write_depth_frame<W: Write>(frame: &DepthFrame, mut w: W) -> Result<(), MapperError> {
    w.write_all(DEPTH_MAGIC)?;
    w.write_all(&frame.width.to_le_bytes())?;
    w.write_all(&frame.height.to_le_bytes())?;
    for d in &frame.depths {
        w.write_all(&d.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_depth_frame<R: Read>(mut r: R) -> Result<DepthFrame, MapperError> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head)?;
    if &head[0..4] != DEPTH_MAGIC {
        return Err(MapperError::InvalidInput("depth frame: bad magic".into()));
    }
    let width = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
    let height = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes"));
    let n = width as usize * height as usize;
    let mut raw = vec![0u8; n * 4];
    r.read_exact(&mut raw)?;
    let depths: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if depths.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(MapperError::InvalidInput(
            "depth frame: depths must be finite and >= 0".into(),
        ));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(MapperError::InvalidInput(format!(
            "depth frame: {} trailing bytes",
            rest.len()
        )));
    }
    Ok(DepthFrame::new(width, height, depths))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let f = DepthFrame::new(2, 1, vec![1.5, 0.0]);
        let mut buf = Vec::new();
        write_depth_frame(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"DPF1");
        assert_eq!(&buf[4..12], &[2, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&buf[12..16], &1.5f32.to_le_bytes());
        assert_eq!(buf.len(), 20);
        assert_eq!(read_depth_frame(&buf[..]).unwrap(), f);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_depth_frame(&b"XXXX\0\0\0\0\0\0\0\0"[..]).is_err());
        let mut buf = Vec::new();
        write_depth_frame(&DepthFrame::new(1, 1, vec![-1.0]), &mut buf).unwrap();
        assert!(read_depth_frame(&buf[..]).is_err());
        let mut buf = Vec::new();
        write_depth_frame(&DepthFrame::new(2, 2, vec![1.0; 4]), &mut buf).unwrap();
        assert!(read_depth_frame(&buf[..buf.len() - 1]).is_err());
    }
}
