use crate::error::{Error, Result};
use crate::model::{IsingModel, SpinAssignment, Var};
use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    /// Spins in the order of [`SampleSet::variables`].
    pub spins: Vec<i8>,
    pub energy: f64,
    pub occurrences: u64,
    pub chain_broken: bool,
}

/// Samples over a fixed, id-ordered variable list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleSet {
    variables: Vec<Var>,
    records: Vec<SampleRecord>,
}

impl SampleSet {
    pub fn new(mut variables: Vec<Var>) -> Self {
        variables.sort_unstable();
        variables.dedup();
        SampleSet {
            variables,
            records: Vec::new(),
        }
    }

    pub fn for_model(model: &IsingModel) -> Self {
        SampleSet {
            variables: model.variables().iter().copied().collect(),
            records: Vec::new(),
        }
    }

    pub fn variables(&self) -> &[Var] {
        &self.variables
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: SampleRecord) -> Result<()> {
        if record.spins.len() != self.variables.len() {
            return Err(Error::LengthMismatch {
                expected: self.variables.len(),
                actual: record.spins.len(),
            });
        }
        if record.occurrences == 0 {
            return Err(Error::param("occurrences must be at least 1"));
        }
        self.records.push(record);
        Ok(())
    }

    /// Appends a sample whose energy is evaluated against `model`.
    pub fn push_evaluated(&mut self, model: &IsingModel, spins: Vec<i8>) -> Result<()> {
        let assignment = SpinAssignment::from_slices(&self.variables, &spins)?;
        let energy = model.energy(&assignment)?;
        self.push(SampleRecord {
            spins,
            energy,
            occurrences: 1,
            chain_broken: false,
        })
    }

    pub fn extend(&mut self, other: SampleSet) -> Result<()> {
        if other.variables != self.variables {
            return Err(Error::param("sample sets cover different variables"));
        }
        self.records.extend(other.records);
        Ok(())
    }

    pub fn assignment(&self, index: usize) -> SpinAssignment {
        SpinAssignment::from_slices(&self.variables, &self.records[index].spins)
            .expect("records hold valid spins")
    }

    pub fn total_occurrences(&self) -> u64 {
        self.records.iter().map(|r| r.occurrences).sum()
    }

    /// Index of the lowest-energy record; ties go to the earliest.
    pub fn lowest(&self) -> Option<usize> {
        (0..self.records.len()).reduce(|best, i| {
            if self.records[i].energy < self.records[best].energy {
                i
            } else {
                best
            }
        })
    }

    /// Merges records with identical spins and chain-break flag, summing
    /// occurrences. Order of first appearance is kept.
    pub fn aggregate(&self) -> SampleSet {
        let mut index: HashMap<(&[i8], bool), usize> = HashMap::new();
        let mut out = SampleSet {
            variables: self.variables.clone(),
            records: Vec::new(),
        };
        for r in &self.records {
            match index.get(&(r.spins.as_slice(), r.chain_broken)) {
                Some(&i) => out.records[i].occurrences += r.occurrences,
                None => {
                    index.insert((r.spins.as_slice(), r.chain_broken), out.records.len());
                    out.records.push(r.clone());
                }
            }
        }
        out
    }

    /// CSV with columns `assignment,energy,occurrences,chain_broken`. The
    /// assignment is one `+`/`-` character per variable in id order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("assignment,energy,occurrences,chain_broken\n");
        for r in &self.records {
            let spins: String = r
                .spins
                .iter()
                .map(|&s| if s > 0 { '+' } else { '-' })
                .collect();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                spins, r.energy, r.occurrences, r.chain_broken
            );
        }
        out
    }

    pub fn from_csv(variables: Vec<Var>, text: &str) -> Result<SampleSet> {
        let mut set = SampleSet::new(variables);
        for (ln, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
            if line.is_empty() || line.starts_with('#') || line.starts_with("assignment") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::parse(ln, "expected 4 columns"));
            }
            let spins = cols[0]
                .chars()
                .map(|c| match c {
                    '+' => Ok(1),
                    '-' => Ok(-1),
                    other => Err(Error::parse(ln, format!("bad spin character `{other}`"))),
                })
                .collect::<Result<Vec<i8>>>()?;
            if spins.len() != set.variables.len() {
                return Err(Error::parse(
                    ln,
                    format!(
                        "assignment has {} spins, expected {}",
                        spins.len(),
                        set.variables.len()
                    ),
                ));
            }
            let energy = cols[1]
                .parse()
                .map_err(|_| Error::parse(ln, "bad energy"))?;
            let occurrences = cols[2]
                .parse()
                .map_err(|_| Error::parse(ln, "bad occurrence count"))?;
            let chain_broken = cols[3]
                .parse()
                .map_err(|_| Error::parse(ln, "bad chain_broken flag"))?;
            set.push(SampleRecord {
                spins,
                energy,
                occurrences,
                chain_broken,
            })
            .map_err(|e| Error::parse(ln, e.to_string()))?;
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(spins: Vec<i8>, energy: f64, broken: bool) -> SampleRecord {
        SampleRecord {
            spins,
            energy,
            occurrences: 1,
            chain_broken: broken,
        }
    }

    #[test]
    fn aggregate_sums_duplicates() {
        let mut s = SampleSet::new(vec![Var(0), Var(1)]);
        s.push(rec(vec![1, -1], -1.0, false)).unwrap();
        s.push(rec(vec![-1, -1], 1.0, false)).unwrap();
        s.push(rec(vec![1, -1], -1.0, false)).unwrap();
        s.push(rec(vec![1, -1], -1.0, true)).unwrap();
        let a = s.aggregate();
        assert_eq!(a.len(), 3);
        assert_eq!(a.records()[0].occurrences, 2);
        assert_eq!(a.total_occurrences(), 4);
    }

    #[test]
    fn csv_round_trip() {
        let mut s = SampleSet::new(vec![Var(3), Var(1)]);
        s.push(rec(vec![1, -1], -0.1, false)).unwrap();
        s.push(SampleRecord {
            spins: vec![-1, -1],
            energy: 2.5,
            occurrences: 3,
            chain_broken: true,
        })
        .unwrap();
        let text = s.to_csv();
        assert!(text.starts_with("assignment,energy,occurrences,chain_broken\n+-,-0.1,1,false\n"));
        let back = SampleSet::from_csv(vec![Var(1), Var(3)], &text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let vars = vec![Var(0), Var(1)];
        assert!(SampleSet::from_csv(vars.clone(), "+,1,1,false\n").is_err());
        assert!(SampleSet::from_csv(vars.clone(), "+x,1,1,false\n").is_err());
        assert!(SampleSet::from_csv(vars, "++,1,0,false\n").is_err());
    }

    #[test]
    fn lowest_prefers_earliest_tie() {
        let mut s = SampleSet::new(vec![Var(0)]);
        s.push(rec(vec![1], 0.0, false)).unwrap();
        s.push(rec(vec![-1], -1.0, false)).unwrap();
        s.push(rec(vec![-1], -1.0, true)).unwrap();
        assert_eq!(s.lowest(), Some(1));
    }
}
