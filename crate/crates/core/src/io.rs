//! Line-oriented text formats for instances and solutions.
//!
//! Instance:
//!
//! ```text
//! HMAX <int>
//! BUDGET <int>
//! DOMAINS <int>
//! LEVELS <int>
//! TECHNICIANS <count>
//! <id> <C(t,1)> ... <C(t,D)> [U <day>...]
//! INTERVENTIONS <count>
//! <id> <duration> <priority> <cost> P <pred ids...> R <D*L ints, row-major by domain>
//! ```
//!
//! Solution:
//!
//! ```text
//! HIRED <ids...>
//! <intervention id> <day> <start> T <tech ids...>
//! OBJ <t1> <t2> <t3> <t4> <z>
//! ```
//!
//! Blank lines and `#` comments are ignored on input. Output is canonical:
//! single spaces, ids ascending, no comments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{Assignment, Instance, Intervention, ModelError, Objective, Solution, Technician};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Semantic(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolutionError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown intervention {id}")]
    UnknownIntervention { line: usize, id: usize },
    #[error("line {line}: unknown technician {id}")]
    UnknownTechnician { line: usize, id: usize },
    #[error("line {line}: intervention {id} appears twice")]
    Duplicate { line: usize, id: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Requirement rows give counts per exact level; they are converted to
    /// cumulative "level or better" counts by suffix sums.
    pub exact_level_requirements: bool,
}

/// Line number and tokens of a non-blank line.
type Tokens<'t> = (usize, Vec<&'t str>);

struct Lines<'t> {
    inner: Box<dyn Iterator<Item = Tokens<'t>> + 't>,
    last: usize,
}

impl<'t> Lines<'t> {
    fn new(text: &'t str) -> Self {
        let it = text.lines().enumerate().filter_map(|(k, raw)| {
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            (!tokens.is_empty()).then_some((k + 1, tokens))
        });
        Self { inner: Box::new(it), last: 0 }
    }

    fn next(&mut self, what: &str) -> Result<Tokens<'t>, ParseError> {
        match self.inner.next() {
            Some((line, tokens)) => {
                self.last = line;
                Ok((line, tokens))
            }
            None => Err(ParseError::Syntax { line: self.last + 1, message: format!("expected {what}, found end of input") }),
        }
    }

    fn keyword_value(&mut self, keyword: &str) -> Result<u64, ParseError> {
        let (line, tokens) = self.next(keyword)?;
        if tokens.len() != 2 || tokens[0] != keyword {
            return Err(syntax(line, format!("expected `{keyword} <int>`")));
        }
        number(line, tokens[1])
    }
}

fn syntax(line: usize, message: String) -> ParseError {
    ParseError::Syntax { line, message }
}

fn number<T: FromStr>(line: usize, token: &str) -> Result<T, ParseError> {
    token.parse().map_err(|_| syntax(line, format!("`{token}` is not a non-negative integer")))
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    parse_instance_with(text, ParseOptions::default())
}

pub fn parse_instance_with(text: &str, options: ParseOptions) -> Result<Instance, ParseError> {
    let mut lines = Lines::new(text);
    let hmax = lines.keyword_value("HMAX")?;
    let budget = lines.keyword_value("BUDGET")?;
    let domains = lines.keyword_value("DOMAINS")? as usize;
    let levels = lines.keyword_value("LEVELS")? as usize;

    let count = lines.keyword_value("TECHNICIANS")? as usize;
    let mut technicians = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, tokens) = lines.next("a technician record")?;
        let split = tokens.iter().position(|&t| t == "U").unwrap_or(tokens.len());
        if split != domains + 1 {
            return Err(syntax(line, format!("technician record needs an id and {domains} skill levels")));
        }
        let id = number(line, tokens[0])?;
        let skills = tokens[1..split].iter().map(|t| number(line, t)).collect::<Result<_, _>>()?;
        let unavailable_days = tokens[split..]
            .iter()
            .skip(1)
            .map(|t| number(line, t))
            .collect::<Result<BTreeSet<u32>, _>>()?;
        technicians.push(Technician { id, skills, unavailable_days });
    }

    let count = lines.keyword_value("INTERVENTIONS")? as usize;
    let mut interventions = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, tokens) = lines.next("an intervention record")?;
        if tokens.len() < 5 || tokens[4] != "P" {
            return Err(syntax(line, "expected `<id> <duration> <priority> <cost> P ... R ...`".into()));
        }
        let r_at = tokens
            .iter()
            .position(|&t| t == "R")
            .ok_or_else(|| syntax(line, "missing `R` requirement section".into()))?;
        let id = number(line, tokens[0])?;
        let duration = number(line, tokens[1])?;
        let priority = number(line, tokens[2])?;
        let cost = number(line, tokens[3])?;
        let predecessors = tokens[5..r_at].iter().map(|t| number(line, t)).collect::<Result<_, _>>()?;
        let flat: Vec<u32> = tokens[r_at + 1..].iter().map(|t| number(line, t)).collect::<Result<_, _>>()?;
        if flat.len() != domains * levels {
            return Err(syntax(
                line,
                format!("expected {} requirement values, found {}", domains * levels, flat.len()),
            ));
        }
        let mut requirements: Vec<Vec<u32>> =
            if levels == 0 { vec![Vec::new(); domains] } else { flat.chunks(levels).map(<[u32]>::to_vec).collect() };
        if options.exact_level_requirements {
            for row in &mut requirements {
                for n in (0..row.len().saturating_sub(1)).rev() {
                    row[n] += row[n + 1];
                }
            }
        }
        interventions.push(Intervention { id, duration, priority, cost, predecessors, requirements });
    }
    if let Some((line, _)) = lines.inner.next() {
        return Err(syntax(line, "unexpected content after the last intervention".into()));
    }
    Ok(Instance::new(hmax, budget, domains, levels, technicians, interventions)?)
}

pub fn serialize_instance(instance: &Instance) -> String {
    let mut out = String::new();
    writeln!(out, "HMAX {}", instance.hmax()).unwrap();
    writeln!(out, "BUDGET {}", instance.budget()).unwrap();
    writeln!(out, "DOMAINS {}", instance.domains()).unwrap();
    writeln!(out, "LEVELS {}", instance.levels()).unwrap();
    writeln!(out, "TECHNICIANS {}", instance.technicians().len()).unwrap();
    for t in instance.technicians() {
        write!(out, "{}", t.id).unwrap();
        for s in &t.skills {
            write!(out, " {s}").unwrap();
        }
        if !t.unavailable_days.is_empty() {
            out.push_str(" U");
            for d in &t.unavailable_days {
                write!(out, " {d}").unwrap();
            }
        }
        out.push('\n');
    }
    writeln!(out, "INTERVENTIONS {}", instance.interventions().len()).unwrap();
    for j in instance.interventions() {
        write!(out, "{} {} {} {} P", j.id, j.duration, j.priority, j.cost).unwrap();
        for p in &j.predecessors {
            write!(out, " {p}").unwrap();
        }
        out.push_str(" R");
        for r in j.requirements.iter().flatten() {
            write!(out, " {r}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Canonical solution text. The `OBJ` line is informative only.
pub fn serialize_solution(solution: &Solution, objective: &Objective) -> String {
    let mut out = String::from("HIRED");
    for h in &solution.hired {
        write!(out, " {h}").unwrap();
    }
    out.push('\n');
    let mut assignments: Vec<&Assignment> = solution.assignments.iter().collect();
    assignments.sort_by_key(|a| a.intervention);
    for a in assignments {
        write!(out, "{} {} {} T", a.intervention, a.day, a.start).unwrap();
        for t in &a.team {
            write!(out, " {t}").unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "OBJ {objective}").unwrap();
    out
}

/// Parses a solution and validates its ids against `instance`. Scheduling
/// feasibility is left to the checker.
pub fn parse_solution(text: &str, instance: &Instance) -> Result<Solution, SolutionError> {
    let n = instance.interventions().len();
    let techs = instance.technicians().len();
    let syntax = |line: usize, message: &str| SolutionError::Syntax { line, message: message.to_string() };
    let num = |line: usize, token: &str| -> Result<u64, SolutionError> {
        token.parse().map_err(|_| SolutionError::Syntax { line, message: format!("`{token}` is not an integer") })
    };

    let mut lines = Lines::new(text);
    let (line, tokens) = lines.next("HIRED").map_err(|_| syntax(1, "expected `HIRED <ids...>`"))?;
    if tokens[0] != "HIRED" {
        return Err(syntax(line, "expected `HIRED <ids...>`"));
    }
    let mut hired = BTreeSet::new();
    for t in &tokens[1..] {
        let id = num(line, t)? as usize;
        if id >= n {
            return Err(SolutionError::UnknownIntervention { line, id });
        }
        if !hired.insert(id) {
            return Err(SolutionError::Duplicate { line, id });
        }
    }

    let mut assignments: BTreeMap<usize, Assignment> = BTreeMap::new();
    let mut seen_obj = false;
    for (line, tokens) in lines.inner.by_ref() {
        if seen_obj {
            return Err(syntax(line, "content after the OBJ line"));
        }
        if tokens[0] == "OBJ" {
            if tokens.len() != 6 {
                return Err(syntax(line, "expected `OBJ <t1> <t2> <t3> <t4> <z>`"));
            }
            for t in &tokens[1..] {
                num(line, t)?;
            }
            seen_obj = true;
            continue;
        }
        if tokens.len() < 4 || tokens[3] != "T" {
            return Err(syntax(line, "expected `<intervention> <day> <start> T <technicians...>`"));
        }
        let id = num(line, tokens[0])? as usize;
        if id >= n {
            return Err(SolutionError::UnknownIntervention { line, id });
        }
        let day = u32::try_from(num(line, tokens[1])?).map_err(|_| syntax(line, "day out of range"))?;
        let start = num(line, tokens[2])?;
        let mut team = BTreeSet::new();
        for t in &tokens[4..] {
            let tech = num(line, t)? as usize;
            if tech >= techs {
                return Err(SolutionError::UnknownTechnician { line, id: tech });
            }
            team.insert(tech);
        }
        if hired.contains(&id) || assignments.insert(id, Assignment { intervention: id, day, start, team }).is_some() {
            return Err(SolutionError::Duplicate { line, id });
        }
    }
    Ok(Solution::new(hired, assignments.into_values().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "HMAX 120\nBUDGET 0\nDOMAINS 1\nLEVELS 1\nTECHNICIANS 1\n0 1\nINTERVENTIONS 1\n0 30 1 5 P R 0\n";

    #[test]
    fn minimal_document() {
        let inst = parse_instance(MINIMAL).unwrap();
        assert_eq!(inst.technicians().len(), 1);
        assert_eq!(inst.interventions().len(), 1);
        assert_eq!(serialize_instance(&inst), MINIMAL);
    }

    #[test]
    fn shape_of_smallest_benchmark() {
        // 5 interventions, 5 technicians, 3 domains, 2 levels
        let mut text = String::from("HMAX 120\nBUDGET 10\nDOMAINS 3\nLEVELS 2\nTECHNICIANS 5\n");
        for t in 0..5 {
            text += &format!("{t} 2 1 {}\n", t % 3);
        }
        text += "INTERVENTIONS 5\n";
        for i in 0..5 {
            let preds = if i > 0 { format!(" {}", i - 1) } else { String::new() };
            text += &format!("{i} 30 {} 3 P{preds} R 1 0 1 1 0 0\n", 1 + i % 4);
        }
        let inst = parse_instance(&text).unwrap();
        assert_eq!(
            (inst.interventions().len(), inst.technicians().len(), inst.domains(), inst.levels()),
            (5, 5, 3, 2)
        );
    }

    #[test]
    fn cycle_is_a_semantic_error() {
        let text = "HMAX 120\nBUDGET 0\nDOMAINS 1\nLEVELS 1\nTECHNICIANS 1\n0 1\nINTERVENTIONS 2\n\
                    0 30 1 5 P 1 R 0\n1 30 1 5 P 0 R 0\n";
        let err = parse_instance(text).unwrap_err();
        assert!(matches!(err, ParseError::Semantic(ModelError::PrecedenceCycle(_))), "{err}");
        assert!(err.to_string().starts_with("cycle through interventions"));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "HMAX 120\nBUDGET x\n";
        assert_eq!(parse_instance(text).unwrap_err(), ParseError::Syntax {
            line: 2,
            message: "`x` is not a non-negative integer".into()
        });
        let text = MINIMAL.replace("R 0", "R 0 0");
        assert!(matches!(parse_instance(&text), Err(ParseError::Syntax { line: 8, .. })));
    }

    #[test]
    fn comments_calendars_and_exact_levels() {
        let text = "# header\nHMAX 120\nBUDGET 0\nDOMAINS 1\nLEVELS 2\nTECHNICIANS 1\n0 2 U 3 1\n\
                    INTERVENTIONS 1\n0 30 1 5 P R 1 2  # one at level 1, two at level 2\n";
        let inst = parse_instance_with(text, ParseOptions { exact_level_requirements: true }).unwrap();
        assert_eq!(inst.intervention(0).requirements, vec![vec![3, 2]]);
        assert_eq!(inst.technician(0).unavailable_days, [1, 3].into());
        let again = parse_instance(&serialize_instance(&inst)).unwrap();
        assert_eq!(again, inst);
    }

    fn three_job_instance() -> Instance {
        parse_instance(
            "HMAX 120\nBUDGET 5\nDOMAINS 1\nLEVELS 1\nTECHNICIANS 3\n0 1\n1 1\n2 1\nINTERVENTIONS 4\n\
             0 30 1 5 P R 1\n1 30 2 5 P 0 R 1\n2 30 3 5 P R 2\n3 30 4 5 P R 0\n",
        )
        .unwrap()
    }

    #[test]
    fn solution_round_trip() {
        let inst = three_job_instance();
        let sol = Solution::new(
            [3].into(),
            vec![
                Assignment { intervention: 2, day: 2, start: 15, team: [1, 2].into() },
                Assignment { intervention: 0, day: 1, start: 0, team: [0].into() },
                Assignment { intervention: 1, day: 1, start: 30, team: [0].into() },
            ],
        );
        let obj = crate::model::evaluate(&inst, &sol, crate::model::T4Mode::Priority);
        let text = serialize_solution(&sol, &obj);
        assert_eq!(text, "HIRED 3\n0 1 0 T 0\n1 1 30 T 0\n2 2 15 T 1 2\nOBJ 30 60 165 0 2340\n");
        assert_eq!(parse_solution(&text, &inst).unwrap(), sol);

        let empty = Solution::new([0, 1, 2, 3].into(), vec![]);
        let text = serialize_solution(&empty, &Objective::default());
        assert_eq!(parse_solution(&text, &inst).unwrap(), empty);
    }

    #[test]
    fn solution_id_validation() {
        let inst = three_job_instance();
        assert_eq!(
            parse_solution("HIRED\n999 1 0 T 0\n", &inst).unwrap_err(),
            SolutionError::UnknownIntervention { line: 2, id: 999 }
        );
        assert_eq!(
            parse_solution("HIRED\n0 1 0 T 7\n", &inst).unwrap_err(),
            SolutionError::UnknownTechnician { line: 2, id: 7 }
        );
        assert_eq!(
            parse_solution("HIRED\n0 1 0 T 0\n0 1 30 T 0\n", &inst).unwrap_err(),
            SolutionError::Duplicate { line: 3, id: 0 }
        );
        assert_eq!(
            parse_solution("HIRED 0\n0 1 0 T 0\n", &inst).unwrap_err(),
            SolutionError::Duplicate { line: 2, id: 0 }
        );
    }
}
