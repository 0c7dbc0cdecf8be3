//! The `EMBER-BUNDLE v1` molecule-level integral file.
//!
//! ```text
//! EMBER-BUNDLE v1
//! NAO <n>            NELEC <n>          ENUC <Ha>
//! BASIS <label>      NATOM <n>
//! ATOM i <symbol> x y z      (Å, one per atom)
//! AOMAP i atom               (one per AO)
//! OVERLAP                     then `i j value`, i ≤ j
//! HCORE                       then `i j value`, i ≤ j
//! ERI                         then `p q r s value`, canonical order
//! CHECKSUM <sum of every value in OVERLAP, HCORE and ERI, in file order>
//! ```
//!
//! Floats are written with 17 significant digits so the text round-trips
//! exactly; the checksum is recomputed in file order and compared bitwise.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::eri::EriTensor;
use crate::error::{EmberError, Result};
use crate::linalg;

pub const BUNDLE_VERSION: &str = "EMBER-BUNDLE v1";
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub symbol: String,
    /// Cartesian position in Å.
    pub position: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralBundle {
    pub n_ao: usize,
    pub n_elec: usize,
    pub e_nuc: f64,
    pub overlap: DMatrix<f64>,
    pub hcore: DMatrix<f64>,
    pub eri: EriTensor,
    pub atom_map: Vec<usize>,
    pub atoms: Vec<Atom>,
    pub basis_label: String,
}

/// Format a float with 17 significant digits.
pub fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

impl IntegralBundle {
    /// Check every structural invariant of the bundle.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_ao;
        if self.overlap.shape() != (n, n) || self.hcore.shape() != (n, n) {
            return Err(EmberError::Invalid(format!("matrix dimensions do not match NAO = {n}")));
        }
        if self.eri.n_orb() != n {
            return Err(EmberError::Invalid("ERI dimension does not match NAO".into()));
        }
        if !self.n_elec.is_multiple_of(2) {
            return Err(EmberError::Invalid(format!("odd electron count {} (closed-shell only)", self.n_elec)));
        }
        if self.atom_map.len() != n {
            return Err(EmberError::Invalid("AOMAP must cover every AO exactly once".into()));
        }
        if let Some(&a) = self.atom_map.iter().find(|&&a| a >= self.atoms.len()) {
            return Err(EmberError::Invalid(format!("AOMAP references missing atom {a}")));
        }
        for (name, m) in [("OVERLAP", &self.overlap), ("HCORE", &self.hcore)] {
            let asym = linalg::max_abs(&(m - m.transpose()));
            if asym > SYMMETRY_TOL {
                return Err(EmberError::Symmetry(format!("{name} asymmetric by {asym:e}")));
            }
        }
        let (w, _) = linalg::eigh(&self.overlap);
        if n > 0 && w[0] <= 0.0 {
            return Err(EmberError::NotPositiveDefinite { min_eigenvalue: w[0] });
        }
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| EmberError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| EmberError::io(path, e))
    }

    pub fn to_text(&self) -> String {
        let n = self.n_ao;
        let mut out = String::new();
        let _ = writeln!(out, "{BUNDLE_VERSION}");
        let _ = writeln!(out, "NAO {n}");
        let _ = writeln!(out, "NELEC {}", self.n_elec);
        let _ = writeln!(out, "ENUC {}", f17(self.e_nuc));
        let _ = writeln!(out, "BASIS {}", self.basis_label);
        let _ = writeln!(out, "NATOM {}", self.atoms.len());
        for (i, a) in self.atoms.iter().enumerate() {
            let [x, y, z] = a.position;
            let _ = writeln!(out, "ATOM {i} {} {} {} {}", a.symbol, f17(x), f17(y), f17(z));
        }
        for (i, a) in self.atom_map.iter().enumerate() {
            let _ = writeln!(out, "AOMAP {i} {a}");
        }
        let mut checksum = 0.0;
        for (name, m) in [("OVERLAP", &self.overlap), ("HCORE", &self.hcore)] {
            let _ = writeln!(out, "{name}");
            for i in 0..n {
                for j in i..n {
                    let v = m[(i, j)];
                    checksum += v;
                    let _ = writeln!(out, "{i} {j} {}", f17(v));
                }
            }
        }
        let _ = writeln!(out, "ERI");
        for ((p, q, r, s), v) in self.eri.nonzero() {
            checksum += v;
            let _ = writeln!(out, "{p} {q} {r} {s} {}", f17(v));
        }
        let _ = writeln!(out, "CHECKSUM {}", f17(checksum));
        out
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let loc = |line: usize| format!("{source}:{line}");

        let (l0, first) = lines.next().ok_or_else(|| EmberError::parse(source, "empty bundle"))?;
        if first != BUNDLE_VERSION {
            return Err(EmberError::parse(
                loc(l0),
                format!("unknown version tag {first:?} (expected {BUNDLE_VERSION:?})"),
            ));
        }

        let mut n_ao = None;
        let mut n_elec = None;
        let mut e_nuc = None;
        let mut basis = None;
        let mut n_atom = None;
        let mut atoms: Vec<Option<Atom>> = Vec::new();
        let mut atom_map: Vec<Option<usize>> = Vec::new();
        let mut overlap = None::<DMatrix<f64>>;
        let mut hcore = None::<DMatrix<f64>>;
        let mut eri = None::<EriTensor>;
        let mut eri_seen: Vec<bool> = Vec::new();
        let mut section = "";
        let mut checksum_acc = 0.0f64;
        let mut checksum = None;

        for (ln, line) in lines {
            let mut tok = line.split_whitespace();
            let head = tok.next().unwrap_or_default();
            let rest: Vec<&str> = tok.collect();
            let need_nao = || n_ao.ok_or_else(|| EmberError::parse(loc(ln), "NAO must precede data"));
            match head {
                "NAO" => n_ao = Some(parse_usize(&rest, 0, &loc(ln))?),
                "NELEC" => n_elec = Some(parse_usize(&rest, 0, &loc(ln))?),
                "ENUC" => e_nuc = Some(parse_f64(&rest, 0, &loc(ln))?),
                "BASIS" => basis = Some(rest.join(" ")),
                "NATOM" => {
                    let k = parse_usize(&rest, 0, &loc(ln))?;
                    n_atom = Some(k);
                    atoms = vec![None; k];
                }
                "ATOM" => {
                    let i = parse_usize(&rest, 0, &loc(ln))?;
                    let slot = atoms
                        .get_mut(i)
                        .ok_or_else(|| EmberError::parse(loc(ln), format!("atom index {i} out of range")))?;
                    let symbol =
                        rest.get(1).ok_or_else(|| EmberError::parse(loc(ln), "missing element symbol"))?.to_string();
                    *slot = Some(Atom {
                        symbol,
                        position: [
                            parse_f64(&rest, 2, &loc(ln))?,
                            parse_f64(&rest, 3, &loc(ln))?,
                            parse_f64(&rest, 4, &loc(ln))?,
                        ],
                    });
                }
                "AOMAP" => {
                    let n = need_nao()?;
                    if atom_map.is_empty() {
                        atom_map = vec![None; n];
                    }
                    let i = parse_usize(&rest, 0, &loc(ln))?;
                    let a = parse_usize(&rest, 1, &loc(ln))?;
                    let slot = atom_map
                        .get_mut(i)
                        .ok_or_else(|| EmberError::parse(loc(ln), format!("AO index {i} out of range")))?;
                    if slot.is_some() {
                        return Err(EmberError::parse(loc(ln), format!("AO {i} mapped twice")));
                    }
                    *slot = Some(a);
                }
                "OVERLAP" | "HCORE" => {
                    let n = need_nao()?;
                    section = if head == "OVERLAP" { "OVERLAP" } else { "HCORE" };
                    let m = Some(DMatrix::from_element(n, n, f64::NAN));
                    if head == "OVERLAP" {
                        overlap = m;
                    } else {
                        hcore = m;
                    }
                }
                "ERI" => {
                    let n = need_nao()?;
                    section = "ERI";
                    let t = EriTensor::zeros(n);
                    let npair = n * (n + 1) / 2;
                    eri_seen = vec![false; npair * (npair + 1) / 2];
                    eri = Some(t);
                }
                "CHECKSUM" => {
                    checksum = Some((ln, parse_f64(&rest, 0, &loc(ln))?));
                    section = "";
                }
                _ => {
                    let n = need_nao()?;
                    let mut fields = vec![head];
                    fields.extend(rest.iter());
                    match section {
                        "OVERLAP" | "HCORE" => {
                            if fields.len() != 3 {
                                return Err(EmberError::parse(loc(ln), "expected `i j value`"));
                            }
                            let i = parse_usize(&fields, 0, &loc(ln))?;
                            let j = parse_usize(&fields, 1, &loc(ln))?;
                            let v = parse_f64(&fields, 2, &loc(ln))?;
                            if i >= n || j >= n {
                                return Err(EmberError::parse(loc(ln), format!("index ({i},{j}) exceeds NAO {n}")));
                            }
                            checksum_acc += v;
                            let m = if section == "OVERLAP" { overlap.as_mut() } else { hcore.as_mut() }
                                .expect("section matrix allocated");
                            let (a, b) = (i.min(j), i.max(j));
                            if !m[(a, b)].is_nan() && (m[(a, b)] - v).abs() > SYMMETRY_TOL {
                                return Err(EmberError::Symmetry(format!(
                                    "{section} ({i},{j}) given twice with different values"
                                )));
                            }
                            m[(a, b)] = v;
                            m[(b, a)] = v;
                        }
                        "ERI" => {
                            if fields.len() != 5 {
                                return Err(EmberError::parse(loc(ln), "expected `p q r s value`"));
                            }
                            let idx: Vec<usize> =
                                (0..4).map(|k| parse_usize(&fields, k, &loc(ln))).collect::<Result<_>>()?;
                            let v = parse_f64(&fields, 4, &loc(ln))?;
                            if idx.iter().any(|&x| x >= n) {
                                return Err(EmberError::parse(loc(ln), format!("ERI index {idx:?} exceeds NAO {n}")));
                            }
                            checksum_acc += v;
                            let t = eri.as_mut().expect("ERI allocated");
                            let (p, q, r, s) = (idx[0], idx[1], idx[2], idx[3]);
                            let slot = canonical_slot(p, q, r, s);
                            if eri_seen[slot] {
                                let prev = t.at(p, q, r, s);
                                if (prev - v).abs() > SYMMETRY_TOL {
                                    return Err(EmberError::Symmetry(format!(
                                        "({p}{q}|{r}{s}) = {v:e} conflicts with an equivalent entry {prev:e}"
                                    )));
                                }
                            }
                            eri_seen[slot] = true;
                            t.set(p, q, r, s, v);
                        }
                        _ => {
                            return Err(EmberError::parse(loc(ln), format!("unexpected line {line:?}")));
                        }
                    }
                }
            }
        }

        let missing = |what: &str| EmberError::parse(source, format!("missing {what}"));
        let n_ao = n_ao.ok_or_else(|| missing("NAO"))?;
        let n_elec = n_elec.ok_or_else(|| missing("NELEC"))?;
        let e_nuc = e_nuc.ok_or_else(|| missing("ENUC"))?;
        let basis_label = basis.ok_or_else(|| missing("BASIS"))?;
        let n_atom = n_atom.ok_or_else(|| missing("NATOM"))?;
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .enumerate()
            .map(|(i, a)| a.ok_or_else(|| missing(&format!("ATOM {i}"))))
            .collect::<Result<_>>()?;
        debug_assert_eq!(atoms.len(), n_atom);
        if atom_map.len() != n_ao {
            return Err(EmberError::Invalid("AOMAP must cover every AO exactly once".into()));
        }
        let atom_map: Vec<usize> = atom_map
            .into_iter()
            .enumerate()
            .map(|(i, a)| a.ok_or_else(|| EmberError::Invalid(format!("AO {i} missing from AOMAP"))))
            .collect::<Result<_>>()?;
        let overlap = overlap.ok_or_else(|| missing("OVERLAP"))?;
        let hcore = hcore.ok_or_else(|| missing("HCORE"))?;
        for (name, m) in [("OVERLAP", &overlap), ("HCORE", &hcore)] {
            if m.iter().any(|v| v.is_nan()) {
                return Err(EmberError::Invalid(format!("{name} section incomplete for NAO = {n_ao}")));
            }
        }
        let eri = eri.ok_or_else(|| missing("ERI"))?;
        let (cl, expected) = checksum.ok_or_else(|| missing("CHECKSUM"))?;
        if expected.to_bits() != checksum_acc.to_bits() {
            return Err(EmberError::parse(
                format!("{source}:{cl}"),
                format!("checksum mismatch: file says {}, payload sums to {}", f17(expected), f17(checksum_acc)),
            ));
        }

        let bundle = IntegralBundle { n_ao, n_elec, e_nuc, overlap, hcore, eri, atom_map, atoms, basis_label };
        bundle.validate()?;
        Ok(bundle)
    }

    /// AO indices grouped by owning atom, in atom order.
    pub fn aos_by_atom(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.atoms.len()];
        for (ao, &a) in self.atom_map.iter().enumerate() {
            groups[a].push(ao);
        }
        groups
    }

    /// Molecule label from the atom list in first-appearance order, e.g. `HOCN`, `OH2`.
    pub fn formula_label(&self) -> String {
        let mut counts: Vec<(&str, usize)> = Vec::new();
        for a in &self.atoms {
            match counts.iter_mut().find(|(s, _)| *s == a.symbol) {
                Some(c) => c.1 += 1,
                None => counts.push((&a.symbol, 1)),
            }
        }
        counts.iter().map(|&(s, n)| if n == 1 { s.to_string() } else { format!("{s}{n}") }).collect()
    }
}

fn canonical_slot(p: usize, q: usize, r: usize, s: usize) -> usize {
    let pr = |a: usize, b: usize| if a >= b { a * (a + 1) / 2 + b } else { b * (b + 1) / 2 + a };
    pr(pr(p, q), pr(r, s))
}

fn parse_usize(fields: &[&str], k: usize, loc: &str) -> Result<usize> {
    let f = fields.get(k).ok_or_else(|| EmberError::parse(loc, format!("missing field {}", k + 1)))?;
    f.parse().map_err(|_| EmberError::parse(loc, format!("expected a non-negative integer, found {f:?}")))
}

fn parse_f64(fields: &[&str], k: usize, loc: &str) -> Result<f64> {
    let f = fields.get(k).ok_or_else(|| EmberError::parse(loc, format!("missing field {}", k + 1)))?;
    let v: f64 = f.parse().map_err(|_| EmberError::parse(loc, format!("expected a number, found {f:?}")))?;
    if !v.is_finite() {
        return Err(EmberError::parse(loc, format!("non-finite value {f:?}")));
    }
    Ok(v)
}
