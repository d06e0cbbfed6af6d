//! A small DPLL satisfiability checker over DIMACS-style integer literals.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, Default)]
pub(crate) struct Cnf {
    vars: usize,
    clauses: Vec<Vec<i32>>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Val {
    Unset,
    True,
    False,
}

impl Cnf {
    pub(crate) fn fresh(&mut self) -> i32 {
        self.vars += 1;
        self.vars as i32
    }

    pub(crate) fn add(&mut self, clause: Vec<i32>) {
        self.clauses.push(clause);
    }

    pub(crate) fn satisfiable(&self) -> bool {
        let mut assignment = vec![Val::Unset; self.vars + 1];
        self.search(&mut assignment)
    }

    fn value(assignment: &[Val], lit: i32) -> Val {
        match (assignment[lit.unsigned_abs() as usize], lit > 0) {
            (Val::Unset, _) => Val::Unset,
            (Val::True, true) | (Val::False, false) => Val::True,
            _ => Val::False,
        }
    }

    fn set(assignment: &mut [Val], lit: i32, trail: &mut Vec<usize>) {
        let v = lit.unsigned_abs() as usize;
        assignment[v] = if lit > 0 { Val::True } else { Val::False };
        trail.push(v);
    }

    /// Unit propagation to fixpoint. Returns `false` on conflict.
    fn propagate(&self, assignment: &mut [Val], trail: &mut Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            for clause in &self.clauses {
                let mut unset = None;
                let mut unset_count = 0;
                let mut satisfied = false;
                for &lit in clause {
                    match Self::value(assignment, lit) {
                        Val::True => {
                            satisfied = true;
                            break;
                        }
                        Val::Unset => {
                            unset_count += 1;
                            unset = Some(lit);
                        }
                        Val::False => {}
                    }
                }
                if satisfied {
                    continue;
                }
                match (unset_count, unset) {
                    (0, _) => return false,
                    (1, Some(lit)) => {
                        Self::set(assignment, lit, trail);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(&self, assignment: &mut Vec<Val>) -> bool {
        let mut trail = Vec::new();
        if !self.propagate(assignment, &mut trail) {
            Self::undo(assignment, &trail);
            return false;
        }
        let branch = self.clauses.iter().find_map(|clause| {
            let open = clause
                .iter()
                .all(|&l| Self::value(assignment, l) != Val::True);
            if open {
                clause
                    .iter()
                    .copied()
                    .find(|&l| Self::value(assignment, l) == Val::Unset)
            } else {
                None
            }
        });
        let Some(lit) = branch else {
            return true;
        };
        for choice in [lit, -lit] {
            let mut local = Vec::new();
            Self::set(assignment, choice, &mut local);
            if self.search(assignment) {
                return true;
            }
            Self::undo(assignment, &local);
        }
        Self::undo(assignment, &trail);
        false
    }

    fn undo(assignment: &mut [Val], trail: &[usize]) {
        for &v in trail {
            assignment[v] = Val::Unset;
        }
    }
}
