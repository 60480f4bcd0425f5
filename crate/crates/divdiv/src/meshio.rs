//! Plain-text meshes: a header line `#V #T`, one `x y` line per vertex, then
//! one zero-based `i j k` line per triangle. Edges are rebuilt on reading.

use std::io::{BufRead, Write};

use divdiv_core::mesh::{Domain, Mesh};

use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", mesh.n_vertices(), mesh.n_triangles())?;
    for v in mesh.vertices() {
        writeln!(w, "{:e} {:e}", v[0], v[1])?;
    }
    for t in mesh.triangles() {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

fn parse_fields<T: std::str::FromStr>(line: &str, n: usize, lineno: usize) -> Result<Vec<T>> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != n {
        return Err(Error::Parse { line: lineno, message: format!("expected {n} fields, found {}", fields.len()) });
    }
    fields
        .iter()
        .map(|f| f.parse().map_err(|_| Error::Parse { line: lineno, message: format!("cannot parse `{f}`") }))
        .collect()
}

pub fn read_mesh<R: BufRead>(r: R, domain: Domain) -> Result<Mesh> {
    let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(s))) => Ok((i, s)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(Error::Parse { line: 0, message: format!("unexpected end of file, expected {what}") }),
        }
    };
    let (i, header) = next("header")?;
    let counts: Vec<usize> = parse_fields(&header, 2, i)?;
    let mut vertices = Vec::with_capacity(counts[0]);
    for _ in 0..counts[0] {
        let (i, l) = next("vertex")?;
        let v: Vec<f64> = parse_fields(&l, 2, i)?;
        vertices.push([v[0], v[1]]);
    }
    let mut triangles = Vec::with_capacity(counts[1]);
    for _ in 0..counts[1] {
        let (i, l) = next("triangle")?;
        let t: Vec<usize> = parse_fields(&l, 3, i)?;
        if let Some(bad) = t.iter().find(|&&v| v >= counts[0]) {
            return Err(Error::Parse { line: i, message: format!("vertex index {bad} out of range") });
        }
        triangles.push([t[0], t[1], t[2]]);
    }
    Ok(Mesh::from_raw(vertices, triangles, domain)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let m = Mesh::lshape(2).unwrap().perturb(0.2, 5).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(buf.as_slice(), Domain::LShape).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.n_edges(), m.n_edges());
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(read_mesh("3 1\n0 0\n1 0\n".as_bytes(), Domain::Custom), Err(Error::Parse { .. })));
        assert!(matches!(
            read_mesh("3 1\n0 0\n1 0\n0 1\n0 1 5\n".as_bytes(), Domain::Custom),
            Err(Error::Parse { line: 5, .. })
        ));
        assert!(matches!(
            read_mesh("3 1\n0 0\n1 x\n0 1\n0 1 2\n".as_bytes(), Domain::Custom),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
