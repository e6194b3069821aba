//! MATPOWER case-file reader (the `mpc.baseMVA`, `mpc.bus`, `mpc.gen`,
//! `mpc.branch` and `mpc.gencost` subset).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{Branch, Bus, Generator, NetError, Network};

type Table = Vec<(usize, Vec<f64>)>;

const BUS_TYPE_REF: f64 = 3.0;
const COST_MODEL_PWL: f64 = 1.0;
const COST_MODEL_POLY: f64 = 2.0;

/// Missing angle-limit columns are read as a full turn and left for
/// `validate` to clamp.
const NO_ANGLE_LIMIT: f64 = 2.0 * PI;

pub fn parse_case(text: &str) -> Result<Network, NetError> {
    let raw = RawCase::scan(text)?;
    raw.into_network()
}

#[derive(Default)]
struct RawCase {
    name: Option<String>,
    base_mva: Option<(usize, f64)>,
    tables: BTreeMap<String, (usize, Table)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> NetError {
    NetError::Parse {
        line,
        message: message.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(k) => &line[..k],
        None => line,
    }
}

fn parse_number(tok: &str, line: usize) -> Result<f64, NetError> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("expected a number, found '{tok}'")))
}

impl RawCase {
    fn scan(text: &str) -> Result<Self, NetError> {
        let mut raw = RawCase::default();
        // (field name, start line, closing delimiter, rows, current row)
        let mut open: Option<(String, usize, char, Table, Vec<f64>)> = None;
        for (k, full) in text.lines().enumerate() {
            let line_no = k + 1;
            let mut rest = strip_comment(full).trim();
            if open.is_none() {
                if rest.is_empty() {
                    continue;
                }
                if let Some(def) = rest.strip_prefix("function") {
                    if let Some((_, name)) = def.split_once('=') {
                        raw.name = Some(name.trim().trim_end_matches(';').to_string());
                    }
                    continue;
                }
                let Some(assign) = rest.strip_prefix("mpc.") else {
                    continue;
                };
                let Some((field, value)) = assign.split_once('=') else {
                    return Err(parse_err(line_no, "assignment without '='"));
                };
                let field = field.trim().to_string();
                let value = value.trim();
                if let Some(body) = value.strip_prefix('[') {
                    open = Some((field, line_no, ']', Vec::new(), Vec::new()));
                    rest = body;
                } else if let Some(body) = value.strip_prefix('{') {
                    open = Some((field, line_no, '}', Vec::new(), Vec::new()));
                    rest = body;
                } else {
                    if field == "baseMVA" {
                        let v = value.trim_end_matches(';').trim();
                        raw.base_mva = Some((line_no, parse_number(v, line_no)?));
                    }
                    continue;
                }
            }
            let (_, _, close, rows, row) = open.as_mut().expect("inside a table");
            let (body, closed) = match rest.find(*close) {
                Some(p) => (&rest[..p], true),
                None => (rest, false),
            };
            if *close == ']' {
                for (seg_no, seg) in body.split(';').enumerate() {
                    if seg_no > 0 && !row.is_empty() {
                        rows.push((line_no, std::mem::take(row)));
                    }
                    for tok in seg.split(|c: char| c.is_whitespace() || c == ',') {
                        if !tok.is_empty() {
                            row.push(parse_number(tok, line_no)?);
                        }
                    }
                }
                if !row.is_empty() {
                    rows.push((line_no, std::mem::take(row)));
                }
            }
            if closed {
                let (field, start, _, rows, _) = open.take().expect("inside a table");
                raw.tables.insert(field, (start, rows));
            }
        }
        if let Some((field, start, ..)) = open {
            return Err(parse_err(start, format!("table mpc.{field} is never closed")));
        }
        Ok(raw)
    }

    fn table(&self, name: &str) -> Result<&Table, NetError> {
        self.tables
            .get(name)
            .map(|(_, t)| t)
            .ok_or_else(|| parse_err(0, format!("missing table mpc.{name}")))
    }

    fn into_network(self) -> Result<Network, NetError> {
        let (_, base) = self.base_mva.ok_or_else(|| parse_err(0, "missing mpc.baseMVA"))?;
        if !(base > 0.0) {
            return Err(parse_err(self.base_mva.map_or(0, |b| b.0), "baseMVA must be positive"));
        }
        let buses = self
            .table("bus")?
            .iter()
            .map(|(line, r)| bus_row(*line, r, base))
            .collect::<Result<Vec<_>, _>>()?;

        let gen_rows = self.table("gen")?;
        let cost_rows = self.table("gencost")?;
        if cost_rows.len() < gen_rows.len() {
            let line = cost_rows.last().map_or(0, |r| r.0);
            return Err(parse_err(line, "fewer gencost rows than gen rows"));
        }
        let mut generators = Vec::new();
        for ((line, g), (cline, c)) in gen_rows.iter().zip(cost_rows) {
            need(*line, g, 10, "gen")?;
            if g[7] <= 0.0 {
                continue;
            }
            let (c2, c1, c0) = cost_row(*cline, c)?;
            generators.push(Generator {
                bus: g[0] as i64,
                p_min: g[9] / base,
                p_max: g[8] / base,
                q_min: g[4] / base,
                q_max: g[3] / base,
                cost_c2: c2 * base * base,
                cost_c1: c1 * base,
                cost_c0: c0,
            });
        }

        let mut branches = Vec::new();
        for (k, (line, r)) in self.table("branch")?.iter().enumerate() {
            need(*line, r, 11, "branch")?;
            if r[10] <= 0.0 {
                continue;
            }
            if r[9] != 0.0 {
                return Err(NetError::Unsupported {
                    line: *line,
                    feature: format!("phase-shifting transformer (shift {} deg)", r[9]),
                });
            }
            if r[2] == 0.0 && r[3] == 0.0 {
                return Err(parse_err(*line, "branch with zero impedance"));
            }
            let (g, b) = Branch::admittance(r[2], r[3]);
            let deg = |col: usize, default: f64| r.get(col).map_or(default, |d| d.to_radians());
            branches.push(Branch {
                id: k as i64 + 1,
                from_bus: r[0] as i64,
                to_bus: r[1] as i64,
                g,
                b,
                b_charge: r[4],
                tap: if r[8] == 0.0 { 1.0 } else { r[8] },
                s_max: if r[5] == 0.0 { None } else { Some(r[5] / base) },
                theta_min: deg(11, -NO_ANGLE_LIMIT),
                theta_max: deg(12, NO_ANGLE_LIMIT),
            });
        }

        Ok(Network {
            name: self.name.unwrap_or_else(|| "case".to_string()),
            base_mva: base,
            buses,
            generators,
            branches,
        })
    }
}

fn need(line: usize, row: &[f64], cols: usize, table: &str) -> Result<(), NetError> {
    if row.len() < cols {
        return Err(parse_err(
            line,
            format!("{table} row has {} columns, expected at least {cols}", row.len()),
        ));
    }
    Ok(())
}

fn bus_row(line: usize, r: &[f64], base: f64) -> Result<Bus, NetError> {
    need(line, r, 13, "bus")?;
    Ok(Bus {
        id: r[0] as i64,
        p_load: r[2] / base,
        q_load: r[3] / base,
        g_shunt: r[4] / base,
        b_shunt: r[5] / base,
        v_min: r[12],
        v_max: r[11],
        is_reference: r[1] == BUS_TYPE_REF,
    })
}

/// Polynomial cost (c2, c1, c0) in MW units.
fn cost_row(line: usize, c: &[f64]) -> Result<(f64, f64, f64), NetError> {
    need(line, c, 4, "gencost")?;
    if c[0] == COST_MODEL_PWL {
        return Err(NetError::Unsupported {
            line,
            feature: "piecewise-linear generator cost".into(),
        });
    }
    if c[0] != COST_MODEL_POLY {
        return Err(parse_err(line, format!("unknown cost model {}", c[0])));
    }
    let n = c[3] as usize;
    if n > 3 {
        return Err(NetError::Unsupported {
            line,
            feature: format!("polynomial cost of degree {}", n - 1),
        });
    }
    need(line, c, 4 + n, "gencost")?;
    let coeffs = &c[4..4 + n];
    let at = |power: usize| if power < n { coeffs[n - 1 - power] } else { 0.0 };
    Ok((at(2), at(1), at(0)))
}
