//! Reading and writing grid fields.
//!
//! Two formats are supported:
//!
//! * CSV with one row per node: coordinates `x1..xd` followed by the
//!   components (`f` for scalars, `u1..uc` for vectors). Values are written
//!   with the shortest representation that parses back to the same `f64`.
//! * A compact binary layout: the magic `SBPF`, a `u32` version, a `u32`
//!   dimension, one `u64` per axis length, a kind byte (0 scalar, 1 vector),
//!   a `u32` component count and the little-endian `f64` payload.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::field::{FieldKind, GridField};
use crate::tensor::TensorOps;

const MAGIC: &[u8; 4] = b"SBPF";
const VERSION: u32 = 1;

fn component_names(kind: FieldKind) -> Vec<String> {
    match kind {
        FieldKind::Scalar => vec!["f".to_string()],
        FieldKind::Vector(c) => (1..=c).map(|i| format!("u{i}")).collect(),
    }
}

/// Writes `field` as CSV using the node coordinates of `ops`.
pub fn write_csv<W: Write>(ops: &TensorOps, field: &GridField, writer: W) -> Result<()> {
    if field.shape() != ops.shape() {
        return Err(Error::DimensionMismatch {
            expected: ops.n_nodes(),
            actual: field.n_nodes(),
        });
    }
    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=ops.dim()).map(|i| format!("x{i}")).collect();
    header.extend(component_names(field.kind()));
    out.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for k in 0..field.n_nodes() {
        record.clear();
        record.extend(ops.coordinates(k).iter().map(|x| x.to_string()));
        record.extend(field.components().map(|c| c[k].to_string()));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a CSV field written by [`write_csv`]. The shape is recovered from
/// the number of distinct coordinates along each axis.
pub fn read_csv<R: Read>(reader: R) -> Result<GridField> {
    let mut input = csv::Reader::from_reader(reader);
    let header = input.headers()?.clone();
    let dim = header.iter().take_while(|h| h.starts_with('x')).count();
    let n_values = header.len() - dim;
    if dim == 0 || n_values == 0 {
        return Err(Error::Format(
            "header needs coordinate and value columns".into(),
        ));
    }
    let kind = if n_values == 1 && &header[dim] == "f" {
        FieldKind::Scalar
    } else {
        FieldKind::Vector(n_values)
    };

    let mut coords: Vec<Vec<f64>> = vec![Vec::new(); dim];
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); n_values];
    for row in input.records() {
        let row = row?;
        if row.len() != header.len() {
            return Err(Error::Format(format!(
                "row has {} columns, expected {}",
                row.len(),
                header.len()
            )));
        }
        for (i, cell) in row.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Format(format!("not a number: {cell:?}")))?;
            if i < dim {
                coords[i].push(v);
            } else {
                values[i - dim].push(v);
            }
        }
    }

    let shape: Vec<usize> = coords
        .iter()
        .map(|c| {
            let mut distinct: Vec<f64> = Vec::new();
            for &x in c {
                if !distinct.contains(&x) {
                    distinct.push(x);
                }
            }
            distinct.len()
        })
        .collect();
    GridField::new(shape, kind, values.into_iter().flatten().collect())
}

pub fn write_binary<W: Write>(field: &GridField, mut writer: W) -> Result<()> {
    writer.write_all(MAGIC)?;
    writer.write_all(&VERSION.to_le_bytes())?;
    writer.write_all(&(field.shape().len() as u32).to_le_bytes())?;
    for &n in field.shape() {
        writer.write_all(&(n as u64).to_le_bytes())?;
    }
    let tag: u8 = match field.kind() {
        FieldKind::Scalar => 0,
        FieldKind::Vector(_) => 1,
    };
    writer.write_all(&[tag])?;
    writer.write_all(&(field.n_components() as u32).to_le_bytes())?;
    for v in field.as_slice() {
        writer.write_all(&v.to_le_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

fn read_array<const K: usize, R: Read>(reader: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    reader.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_binary<R: Read>(mut reader: R) -> Result<GridField> {
    if &read_array::<4, _>(&mut reader)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut reader)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(read_array(&mut reader)?) as usize;
    if !(1..=3).contains(&dim) {
        return Err(Error::Format(format!("unsupported dimension {dim}")));
    }
    let shape = (0..dim)
        .map(|_| Ok(u64::from_le_bytes(read_array(&mut reader)?) as usize))
        .collect::<Result<Vec<_>>>()?;
    let tag = read_array::<1, _>(&mut reader)?[0];
    let components = u32::from_le_bytes(read_array(&mut reader)?) as usize;
    let kind = match (tag, components) {
        (0, 1) => FieldKind::Scalar,
        (1, c) if c > 0 => FieldKind::Vector(c),
        _ => return Err(Error::Format(format!("bad kind tag {tag}/{components}"))),
    };
    let len = shape.iter().product::<usize>() * components;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        data.push(f64::from_le_bytes(read_array(&mut reader)?));
    }
    let mut rest = [0u8; 1];
    if reader.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    GridField::new(shape, kind, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (TensorOps, GridField) {
        let ops = TensorOps::uniform(2, 2, -1.0, 1.0, 5).unwrap();
        let u = ops.sample_vector(2, |x| vec![(3.0 * x[0]).sin() / 7.0, x[1].exp()]);
        (ops, u)
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let (ops, u) = sample();
        let mut buf = Vec::new();
        write_csv(&ops, &u, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,u1,u2\n"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), u);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let (_, u) = sample();
        let mut buf = Vec::new();
        write_binary(&u, &mut buf).unwrap();
        assert_eq!(read_binary(buf.as_slice()).unwrap(), u);
        buf.push(0);
        assert!(matches!(read_binary(buf.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_binary(&b"NOPE"[..]), Err(Error::Format(_))));
        assert!(read_csv(&b"x1,f\n0.0,abc\n"[..]).is_err());
    }
}
