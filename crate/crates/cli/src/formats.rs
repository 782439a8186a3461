//! Plain-text trial cache and hopping table files. Every float is written with
//! 17 significant digits so both formats load back bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nhband_core::spectra::PotentialSpec;
use nhband_core::tightbinding::{HoppingTable, Provenance};
use nhband_core::wannier::{GaugeMethod, RealGrid, TrialSet, TrialSource};
use nhband_core::Complex64;

const TRIAL_MAGIC: &str = "# nhband trial cache v1";
const HOPPING_MAGIC: &str = "# nhband hopping table v1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

fn syntax(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        reason: reason.into(),
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

/// `# key = value` header lines, collected until the first non-comment line.
struct Header {
    values: BTreeMap<String, (usize, String)>,
    body_start: usize,
}

fn read_header(lines: &[&str], magic: &str) -> Result<Header, FormatError> {
    if lines.first().map(|l| l.trim_end()) != Some(magic) {
        return Err(syntax(1, format!("expected {magic:?}")));
    }
    let mut values = BTreeMap::new();
    let mut i = 1;
    while i < lines.len() && lines[i].starts_with('#') {
        let body = lines[i].trim_start_matches('#').trim();
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| syntax(i + 1, "header line without `=`"))?;
        values.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
        i += 1;
    }
    Ok(Header { values, body_start: i })
}

impl Header {
    fn get(&self, key: &str) -> Result<(usize, &str), FormatError> {
        self.values
            .get(key)
            .map(|(l, v)| (*l, v.as_str()))
            .ok_or_else(|| syntax(self.body_start, format!("missing header `{key}`")))
    }

    fn usize(&self, key: &str) -> Result<usize, FormatError> {
        let (line, v) = self.get(key)?;
        v.parse().map_err(|_| syntax(line, format!("`{key}` is not an integer")))
    }

    fn complex(&self, key: &str) -> Result<Complex64, FormatError> {
        let (line, v) = self.get(key)?;
        parse_pair(v).ok_or_else(|| syntax(line, format!("`{key}` needs two numbers")))
    }
}

fn parse_pair(s: &str) -> Option<Complex64> {
    let mut it = s.split_whitespace();
    let re = it.next()?.parse().ok()?;
    let im = it.next()?.parse().ok()?;
    it.next().is_none().then_some(Complex64::new(re, im))
}

fn read_file(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_trials(set: &TrialSet) -> String {
    let s = &set.source;
    let n = set.g.len();
    let mut out = String::new();
    let _ = writeln!(out, "{TRIAL_MAGIC}");
    let _ = writeln!(out, "# c = {} {}", f(s.c.re), f(s.c.im));
    let _ = writeln!(out, "# l_max = {}", s.l_max);
    let _ = writeln!(out, "# n_k = {}", s.n_k);
    let _ = writeln!(out, "# n_x = {}", s.n_x);
    let _ = writeln!(out, "# n_cells = {}", set.grid.n_cells);
    let _ = writeln!(out, "# n_functions = {n}");
    let mut cols = vec!["x".to_string()];
    for prefix in ["w", "wt"] {
        for i in 1..=n {
            cols.push(format!("{prefix}{i}_re"));
            cols.push(format!("{prefix}{i}_im"));
        }
    }
    let _ = writeln!(out, "{}", cols.join(" "));
    for i in 0..set.grid.len() {
        let mut row = vec![f(set.grid.x(i))];
        for fam in [&set.g, &set.gt] {
            for func in fam.iter() {
                row.push(f(func[i].re));
                row.push(f(func[i].im));
            }
        }
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_trials(text: &str) -> Result<TrialSet, FormatError> {
    let lines: Vec<&str> = text.lines().collect();
    let h = read_header(&lines, TRIAL_MAGIC)?;
    let c = h.complex("c")?;
    let l_max = h.usize("l_max")?;
    let n_k = h.usize("n_k")?;
    let n_x = h.usize("n_x")?;
    let n_cells = h.usize("n_cells")?;
    let n = h.usize("n_functions")?;
    let grid = RealGrid::new(n_x, n_cells).map_err(|e| syntax(h.body_start, e.to_string()))?;
    let first = h.body_start + 1;
    let data = lines.get(h.body_start + 1..).unwrap_or(&[]);
    if data.len() != grid.len() {
        return Err(syntax(first, format!("expected {} data rows, found {}", grid.len(), data.len())));
    }
    let mut g = vec![Vec::with_capacity(grid.len()); n];
    let mut gt = vec![Vec::with_capacity(grid.len()); n];
    for (r, line) in data.iter().enumerate() {
        let lno = first + r + 1;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| syntax(lno, format!("bad number {t:?}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != 1 + 4 * n {
            return Err(syntax(lno, format!("expected {} columns, found {}", 1 + 4 * n, vals.len())));
        }
        for i in 0..n {
            g[i].push(Complex64::new(vals[1 + 2 * i], vals[2 + 2 * i]));
            gt[i].push(Complex64::new(vals[1 + 2 * (n + i)], vals[2 + 2 * (n + i)]));
        }
    }
    Ok(TrialSet {
        grid,
        g,
        gt,
        source: TrialSource { c, l_max, n_k, n_x },
    })
}

pub fn load_trials(path: &Path) -> Result<TrialSet, FormatError> {
    parse_trials(&read_file(path)?)
}

pub fn write_hoppings(table: &HoppingTable) -> String {
    let p = &table.provenance;
    let mut out = String::new();
    let _ = writeln!(out, "{HOPPING_MAGIC}");
    let _ = writeln!(out, "# method = {}", p.method.as_str());
    let _ = writeln!(out, "# vector_a = {} {}", f(p.potential.vector_a.re), f(p.potential.vector_a.im));
    for (l, v) in p.potential.components() {
        let _ = writeln!(out, "# V[{l}] = {} {}", f(v.re), f(v.im));
    }
    let _ = writeln!(out, "# l_max = {}", p.l_max);
    let _ = writeln!(out, "# n_k = {}", p.n_k);
    let _ = writeln!(out, "# n_bands = {}", table.n);
    let _ = writeln!(out, "# m_max = {}", table.m_max);
    let _ = writeln!(out, "n n' m re im");
    for (a, b, m, t) in table.iter() {
        let _ = writeln!(out, "{} {} {} {} {}", a + 1, b + 1, m, f(t.re), f(t.im));
    }
    out
}

pub fn parse_hoppings(text: &str) -> Result<HoppingTable, FormatError> {
    let lines: Vec<&str> = text.lines().collect();
    let h = read_header(&lines, HOPPING_MAGIC)?;
    let (mline, method) = h.get("method")?;
    let method = match method {
        "diagonal" => GaugeMethod::Diagonal,
        "projection" => GaugeMethod::Projection,
        other => return Err(syntax(mline, format!("unknown method {other:?}"))),
    };
    let vector_a = h.complex("vector_a")?;
    let mut fourier = Vec::new();
    for (key, (line, v)) in &h.values {
        if let Some(l) = key.strip_prefix("V[").and_then(|k| k.strip_suffix(']')) {
            let l: i64 = l.parse().map_err(|_| syntax(*line, format!("bad order in {key:?}")))?;
            let z = parse_pair(v).ok_or_else(|| syntax(*line, "component needs two numbers"))?;
            fourier.push((l, z));
        }
    }
    let provenance = Provenance {
        method,
        potential: PotentialSpec::from_fourier(fourier).with_vector_potential(vector_a),
        l_max: h.usize("l_max")?,
        n_k: h.usize("n_k")?,
    };
    let n = h.usize("n_bands")?;
    let m_max = h.usize("m_max")?;
    let mut table = HoppingTable::zeros(n, m_max, provenance);
    let first = h.body_start + 1;
    let data = lines.get(h.body_start + 1..).unwrap_or(&[]);
    let expected = n * n * (2 * m_max + 1);
    if data.len() != expected {
        return Err(syntax(first, format!("expected {expected} rows, found {}", data.len())));
    }
    for (r, line) in data.iter().enumerate() {
        let lno = first + r + 1;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 5 {
            return Err(syntax(lno, "expected 5 columns"));
        }
        let bad = |what: &str| syntax(lno, format!("bad {what}"));
        let a: usize = t[0].parse().map_err(|_| bad("n"))?;
        let b: usize = t[1].parse().map_err(|_| bad("n'"))?;
        let m: i64 = t[2].parse().map_err(|_| bad("m"))?;
        let re: f64 = t[3].parse().map_err(|_| bad("re"))?;
        let im: f64 = t[4].parse().map_err(|_| bad("im"))?;
        if a == 0 || b == 0 || a > n || b > n || m.unsigned_abs() as usize > m_max {
            return Err(syntax(lno, "index out of range"));
        }
        table.set(a - 1, b - 1, m, Complex64::new(re, im));
    }
    Ok(table)
}

pub fn load_hoppings(path: &Path) -> Result<HoppingTable, FormatError> {
    parse_hoppings(&read_file(path)?)
}
