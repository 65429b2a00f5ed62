//! Datasets over discrete variables, forward sampling, hiding of columns and
//! the hard assignments that complete hidden columns.
//!
//! A variable is either observed in every row or hidden in every row, so the
//! hidden marker lives at column level: [`Column::Hidden`] can never be
//! mistaken for state 0.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{BayesianNetwork, Variable};

/// Cell text used for hidden values in CSV files.
pub const HIDDEN_CELL: &str = "?";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Column {
    Observed(Vec<u32>),
    Hidden,
}

impl Column {
    pub fn values(&self) -> Option<&[u32]> {
        match self {
            Column::Observed(v) => Some(v),
            Column::Hidden => None,
        }
    }

    pub fn is_hidden(&self) -> bool {
        matches!(self, Column::Hidden)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    variables: Vec<Variable>,
    columns: Vec<Column>,
    rows: usize,
    index: HashMap<String, usize>,
}

impl Dataset {
    pub fn new(variables: Vec<Variable>, columns: Vec<Column>, rows: usize) -> Result<Self> {
        if variables.len() != columns.len() {
            return Err(Error::Config("one column per variable".into()));
        }
        let mut index = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.name().to_string(), i).is_some() {
                return Err(Error::DuplicateVariable(v.name().to_string()));
            }
        }
        for (v, col) in variables.iter().zip(&columns) {
            if let Column::Observed(values) = col {
                if values.len() != rows {
                    return Err(Error::Config(format!(
                        "column `{}` has {} rows, expected {rows}",
                        v.name(),
                        values.len()
                    )));
                }
                if let Some((row, &s)) = values
                    .iter()
                    .enumerate()
                    .find(|(_, &s)| s as usize >= v.cardinality())
                {
                    return Err(Error::Row {
                        row,
                        reason: format!("state {s} out of range for `{}`", v.name()),
                    });
                }
            }
        }
        Ok(Dataset {
            variables,
            columns,
            rows,
            index,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        Ok(&self.variables[self.index_of(name)?])
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn is_hidden(&self, name: &str) -> Result<bool> {
        Ok(self.column(name)?.is_hidden())
    }

    pub fn hidden_variables(&self) -> Vec<String> {
        self.variables
            .iter()
            .zip(&self.columns)
            .filter(|(_, c)| c.is_hidden())
            .map(|(v, _)| v.name().to_string())
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.columns.iter().all(|c| !c.is_hidden())
    }

    pub fn value(&self, row: usize, var: usize) -> Option<usize> {
        self.columns[var].values().map(|v| v[row] as usize)
    }

    /// Copy with the named columns hidden.
    pub fn hide_variables<S: AsRef<str>>(&self, vars: &[S]) -> Result<Dataset> {
        let mut out = self.clone();
        for v in vars {
            let i = self.index_of(v.as_ref())?;
            out.columns[i] = Column::Hidden;
        }
        Ok(out)
    }

    /// Fills hidden columns from assignment maps. A map whose state count
    /// differs from the declared cardinality replaces the variable with one
    /// carrying generated labels.
    pub fn complete_with(&self, maps: &[AssignmentMap]) -> Result<Dataset> {
        let mut variables = self.variables.clone();
        let mut columns = self.columns.clone();
        for map in maps {
            let i = self.index_of(&map.variable)?;
            if map.assignment.len() != self.rows {
                return Err(Error::Config(format!(
                    "assignment for `{}` has {} rows, dataset has {}",
                    map.variable,
                    map.assignment.len(),
                    self.rows
                )));
            }
            if map.num_states != variables[i].cardinality() {
                variables[i] = Variable::with_cardinality(&map.variable, map.num_states)?;
            }
            columns[i] = Column::Observed(map.assignment.clone());
        }
        Dataset::new(variables, columns, self.rows)
    }

    /// Copy with an extra, fully hidden column.
    pub fn with_hidden_column(&self, variable: Variable) -> Result<Dataset> {
        let mut variables = self.variables.clone();
        let mut columns = self.columns.clone();
        variables.push(variable);
        columns.push(Column::Hidden);
        Dataset::new(variables, columns, self.rows)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Observed(v) => Column::Observed(rows.iter().map(|&r| v[r]).collect()),
                Column::Hidden => Column::Hidden,
            })
            .collect();
        Dataset {
            variables: self.variables.clone(),
            columns,
            rows: rows.len(),
            index: self.index.clone(),
        }
    }

    /// Seeded random split into (train, test) with `test_fraction` of the
    /// rows held out.
    pub fn split(&self, test_fraction: f64, seed: u64) -> (Dataset, Dataset) {
        let mut order: Vec<usize> = (0..self.rows).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let n_test = ((self.rows as f64) * test_fraction).round() as usize;
        let (test, train) = order.split_at(n_test.min(self.rows));
        let mut train = train.to_vec();
        let mut test = test.to_vec();
        train.sort_unstable();
        test.sort_unstable();
        (self.select_rows(&train), self.select_rows(&test))
    }

    /// Maps every dataset column onto a network node. Returns, for each node,
    /// the dataset column index, or `None` when the node is absent or hidden.
    pub fn node_columns(&self, net: &BayesianNetwork) -> Result<Vec<Option<usize>>> {
        for v in &self.variables {
            let i = net.index_of(v.name())?;
            if !self.columns[self.index[v.name()]].is_hidden() && net.cardinality(i) != v.cardinality() {
                return Err(Error::InvalidVariable {
                    name: v.name().to_string(),
                    reason: format!(
                        "dataset has {} states, network has {}",
                        v.cardinality(),
                        net.cardinality(i)
                    ),
                });
            }
        }
        Ok(net
            .variables()
            .iter()
            .map(|v| {
                self.index
                    .get(v.name())
                    .copied()
                    .filter(|&c| !self.columns[c].is_hidden())
            })
            .collect())
    }

    /// Distinct observed rows in node order, with multiplicities, in order
    /// of first occurrence.
    pub fn observed_patterns(&self, net: &BayesianNetwork) -> Result<Vec<(Vec<Option<usize>>, u64)>> {
        let cols = self.node_columns(net)?;
        let mut seen: HashMap<Vec<Option<usize>>, usize> = HashMap::new();
        let mut patterns: Vec<(Vec<Option<usize>>, u64)> = Vec::new();
        for r in 0..self.rows {
            let row: Vec<Option<usize>> = cols
                .iter()
                .map(|c| c.and_then(|c| self.value(r, c)))
                .collect();
            match seen.get(&row) {
                Some(&p) => patterns[p].1 += 1,
                None => {
                    seen.insert(row.clone(), patterns.len());
                    patterns.push((row, 1));
                }
            }
        }
        Ok(patterns)
    }
}

/// Hard assignment σ of one hidden variable: a state for every row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentMap {
    pub variable: String,
    pub assignment: Vec<u32>,
    pub num_states: usize,
}

impl AssignmentMap {
    pub fn new(variable: impl Into<String>, assignment: Vec<u32>, num_states: usize) -> Result<Self> {
        let variable = variable.into();
        if num_states == 0 {
            return Err(Error::Config(format!("`{variable}` needs at least one state")));
        }
        if let Some((row, &s)) = assignment
            .iter()
            .enumerate()
            .find(|(_, &s)| s as usize >= num_states)
        {
            return Err(Error::Row {
                row,
                reason: format!("state {s} of `{variable}` exceeds {num_states} states"),
            });
        }
        Ok(AssignmentMap {
            variable,
            assignment,
            num_states,
        })
    }

    /// Every row in state 0 of a one-state variable.
    pub fn constant(variable: impl Into<String>, rows: usize) -> Self {
        AssignmentMap {
            variable: variable.into(),
            assignment: vec![0; rows],
            num_states: 1,
        }
    }

    /// Row count per state.
    pub fn state_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_states];
        for &s in &self.assignment {
            counts[s as usize] += 1;
        }
        counts
    }

    /// True when every state is used by at least one row.
    pub fn has_no_empty_states(&self) -> bool {
        self.state_counts().iter().all(|&c| c > 0)
    }
}

/// The current assignment maps of a set of hidden variables, keyed by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HiddenAssignments {
    maps: BTreeMap<String, AssignmentMap>,
}

impl HiddenAssignments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, map: AssignmentMap) {
        self.maps.insert(map.variable.clone(), map);
    }

    pub fn get(&self, name: &str) -> Option<&AssignmentMap> {
        self.maps.get(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<AssignmentMap> {
        self.maps.remove(name)
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.maps.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AssignmentMap> {
        self.maps.values()
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

impl FromIterator<AssignmentMap> for HiddenAssignments {
    fn from_iter<T: IntoIterator<Item = AssignmentMap>>(iter: T) -> Self {
        let mut out = HiddenAssignments::new();
        for m in iter {
            out.insert(m);
        }
        out
    }
}

/// Draws `m` i.i.d. rows from `net` in topological order. Deterministic for
/// a given seed.
pub fn ancestral_sample(net: &BayesianNetwork, m: usize, seed: u64) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::Config("row count must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = net.len();
    let mut columns = vec![Vec::with_capacity(m); n];
    let mut row = vec![0usize; n];
    for _ in 0..m {
        for &i in net.dag().topological_order() {
            let probs = net.cpd(i).row(net.config_of(i, &row));
            row[i] = sample_index(probs, rng.random::<f64>());
        }
        for (col, &s) in columns.iter_mut().zip(&row) {
            col.push(s as u32);
        }
    }
    Dataset::new(
        net.variables().to_vec(),
        columns.into_iter().map(Column::Observed).collect(),
        m,
    )
}

/// Inverse-CDF draw; `u` in [0, 1).
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (s, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return s;
        }
    }
    // rounding left u above the accumulated mass: last state with mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Reads a CSV whose header names variables of `schema`. Cells hold state
/// labels or `?` for hidden values.
pub fn read_csv(path: impl AsRef<Path>, schema: &[Variable]) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let variables = header
        .iter()
        .map(|h| {
            schema
                .iter()
                .find(|v| v.name() == h)
                .cloned()
                .ok_or_else(|| Error::UnknownVariable(h.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let records = read_records(&mut reader, header.len())?;
    build_dataset(variables, &records)
}

/// Reads a CSV and infers each variable's states as its sorted distinct
/// labels.
pub fn read_csv_inferred(path: impl AsRef<Path>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let records = read_records(&mut reader, header.len())?;
    let variables = header
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let labels: BTreeSet<&str> = records
                .iter()
                .map(|r| r[c].as_str())
                .filter(|s| *s != HIDDEN_CELL)
                .collect();
            let states: Vec<String> = if labels.is_empty() {
                vec!["s0".to_string()]
            } else {
                labels.into_iter().map(str::to_string).collect()
            };
            Variable::new(name.clone(), states)
        })
        .collect::<Result<Vec<_>>>()?;
    build_dataset(variables, &records)
}

fn read_records(reader: &mut csv::Reader<std::fs::File>, width: usize) -> Result<Vec<Vec<String>>> {
    let mut records = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Row {
            row,
            reason: e.to_string(),
        })?;
        if rec.len() != width {
            return Err(Error::Row {
                row,
                reason: format!("{} cells, header has {width}", rec.len()),
            });
        }
        records.push(rec.iter().map(|s| s.trim().to_string()).collect());
    }
    Ok(records)
}

fn build_dataset(variables: Vec<Variable>, records: &[Vec<String>]) -> Result<Dataset> {
    let mut columns = Vec::with_capacity(variables.len());
    for (c, var) in variables.iter().enumerate() {
        let hidden = records.iter().filter(|r| r[c] == HIDDEN_CELL).count();
        if hidden > 0 && hidden == records.len() {
            columns.push(Column::Hidden);
            continue;
        }
        let mut values = Vec::with_capacity(records.len());
        for (row, r) in records.iter().enumerate() {
            let cell = &r[c];
            if cell == HIDDEN_CELL {
                return Err(Error::Row {
                    row,
                    reason: format!("`{}` is hidden here but observed elsewhere", var.name()),
                });
            }
            let s = var.state_index(cell).ok_or_else(|| Error::Row {
                row,
                reason: format!("unknown state `{cell}` for `{}`", var.name()),
            })?;
            values.push(s as u32);
        }
        columns.push(Column::Observed(values));
    }
    Dataset::new(variables, columns, records.len())
}

pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv_with_sigma(data, &HiddenAssignments::new(), path)
}

/// Writes the dataset plus one `<var>__sigma` column per assignment map.
pub fn write_csv_with_sigma(data: &Dataset, sigma: &HiddenAssignments, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = data.variables.iter().map(|v| v.name().to_string()).collect();
    header.extend(sigma.iter().map(|m| format!("{}__sigma", m.variable)));
    writer.write_record(&header)?;
    for r in 0..data.rows {
        let mut record: Vec<String> = data
            .variables
            .iter()
            .zip(&data.columns)
            .map(|(v, c)| match c {
                Column::Observed(vals) => v.states()[vals[r] as usize].clone(),
                Column::Hidden => HIDDEN_CELL.to_string(),
            })
            .collect();
        record.extend(sigma.iter().map(|m| m.assignment[r].to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
