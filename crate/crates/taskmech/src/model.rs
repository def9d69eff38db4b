//! Domain types shared by every other module: tasks, agents, types,
//! valuations, dependency DAGs, assignments, completion vectors, and
//! whole-scenario validation.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Absolute tolerance for every floating-point comparison in the crate.
///
/// Welfare values in the instances of interest are small integers, so 1e-9
/// cleanly separates genuine ties from accumulated rounding.
pub const EPSILON: f64 = 1e-9;

/// Identifies one task. Externally tasks are numbered `1..=t`; the internal
/// representation is the zero-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId(u32);

impl TaskId {
    /// Builds a `TaskId` from a zero-based index.
    pub fn from_index(index: usize) -> Self {
        TaskId(index as u32)
    }

    /// Builds a `TaskId` from the external one-based number.
    pub fn from_number(number: u32) -> Option<Self> {
        if number == 0 {
            None
        } else {
            Some(TaskId(number - 1))
        }
    }

    /// Zero-based index, for direct vector addressing.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// External one-based task number.
    pub fn number(self) -> u32 {
        self.0 + 1
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl Serialize for TaskId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u32(self.number())
    }
}

impl<'de> Deserialize<'de> for TaskId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let number = u32::deserialize(deserializer)?;
        TaskId::from_number(number).ok_or_else(|| D::Error::custom("task numbers start at 1"))
    }
}

/// Identifies an agent. Id 0 is the dummy agent that models "task not
/// allocated": zero success probability and zero cost on every task.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct AgentId(u32);

impl AgentId {
    pub const DUMMY: AgentId = AgentId(0);

    pub fn new(id: u32) -> Self {
        AgentId(id)
    }

    pub fn is_dummy(self) -> bool {
        self.0 == 0
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Zero-based index into per-real-agent vectors. Panics for the dummy.
    pub fn index(self) -> usize {
        assert!(!self.is_dummy(), "dummy agent has no profile index");
        (self.0 - 1) as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of tasks, stored as a bitmask (bit = zero-based task index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct TaskSet {
    mask: u64,
}

impl TaskSet {
    pub fn empty() -> Self {
        TaskSet { mask: 0 }
    }

    pub fn from_mask(mask: u64) -> Self {
        TaskSet { mask }
    }

    pub fn mask(self) -> u64 {
        self.mask
    }

    pub fn insert(&mut self, task: TaskId) {
        self.mask |= 1 << task.index();
    }

    pub fn contains(self, task: TaskId) -> bool {
        self.mask & (1 << task.index()) != 0
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn iter(self) -> impl Iterator<Item = TaskId> {
        let mask = self.mask;
        (0..64).filter(move |i| mask & (1 << i) != 0).map(TaskId::from_index)
    }
}

impl FromIterator<TaskId> for TaskSet {
    fn from_iter<I: IntoIterator<Item = TaskId>>(iter: I) -> Self {
        let mut set = TaskSet::empty();
        for task in iter {
            set.insert(task);
        }
        set
    }
}

impl fmt::Display for TaskSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, task) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{task}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for TaskSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter().map(|t| t.number()))
    }
}

impl<'de> Deserialize<'de> for TaskSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let numbers = Vec::<u32>::deserialize(deserializer)?;
        let mut set = TaskSet::empty();
        for n in numbers {
            let task =
                TaskId::from_number(n).ok_or_else(|| D::Error::custom("task numbers start at 1"))?;
            set.insert(task);
        }
        Ok(set)
    }
}

/// Which tasks have been completed; one bit per task.
///
/// The canonical text form is a fixed-width bitstring with task 1 leftmost,
/// e.g. `"10"` for "task 1 done, task 2 not".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CompletionVector {
    mask: u64,
    len: u16,
}

impl CompletionVector {
    pub fn empty(num_tasks: usize) -> Self {
        CompletionVector { mask: 0, len: num_tasks as u16 }
    }

    pub fn from_mask(mask: u64, num_tasks: usize) -> Self {
        debug_assert!(num_tasks >= 64 || mask < (1 << num_tasks));
        CompletionVector { mask, len: num_tasks as u16 }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut mask = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                mask |= 1 << i;
            }
        }
        CompletionVector { mask, len: bits.len() as u16 }
    }

    /// Parses the canonical bitstring form (task 1 leftmost).
    pub fn from_bitstring(s: &str) -> Option<Self> {
        let mut mask = 0u64;
        if s.is_empty() || s.len() > 64 {
            return None;
        }
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => mask |= 1 << i,
                '0' => {}
                _ => return None,
            }
        }
        Some(CompletionVector { mask, len: s.len() as u16 })
    }

    pub fn mask(self) -> u64 {
        self.mask
    }

    pub fn num_tasks(self) -> usize {
        self.len as usize
    }

    pub fn is_done(self, task: TaskId) -> bool {
        self.mask & (1 << task.index()) != 0
    }

    pub fn count_done(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn done_tasks(self) -> TaskSet {
        TaskSet::from_mask(self.mask)
    }

    /// Canonical bitstring, task 1 leftmost.
    pub fn bitstring(self) -> String {
        (0..self.len).map(|i| if self.mask & (1 << i) != 0 { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for CompletionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bitstring())
    }
}

impl Serialize for CompletionVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.bitstring())
    }
}

impl<'de> Deserialize<'de> for CompletionVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CompletionVector::from_bitstring(&s)
            .ok_or_else(|| D::Error::custom("completion vectors are bitstrings like \"10\""))
    }
}

/// An agent's private type: per-task attempt costs and success probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentType {
    /// Cost of attempting each task, in currency units. Incurred whether or
    /// not the attempt succeeds, but only if the task is actually attempted.
    pub costs: Vec<f64>,
    /// Probability of completing each task, given it is attempted.
    pub probs: Vec<f64>,
}

impl AgentType {
    pub fn new(costs: Vec<f64>, probs: Vec<f64>) -> Self {
        AgentType { costs, probs }
    }

    /// The dummy agent's type: all-zero costs and probabilities.
    pub fn zero(num_tasks: usize) -> Self {
        AgentType { costs: vec![0.0; num_tasks], probs: vec![0.0; num_tasks] }
    }

    pub fn num_tasks(&self) -> usize {
        self.probs.len()
    }
}

/// The types of all real agents `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeProfile {
    types: Vec<AgentType>,
}

impl TypeProfile {
    pub fn new(types: Vec<AgentType>) -> Self {
        TypeProfile { types }
    }

    pub fn num_agents(&self) -> usize {
        self.types.len()
    }

    pub fn num_tasks(&self) -> usize {
        self.types.first().map_or(0, AgentType::num_tasks)
    }

    /// Ids of the real agents, `1..=n`.
    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (1..=self.types.len() as u32).map(AgentId::new)
    }

    /// The stored type of a real agent. Panics for the dummy agent, whose
    /// type is implicit; use [`TypeProfile::prob`]/[`TypeProfile::cost`]
    /// where the dummy may appear.
    pub fn get(&self, agent: AgentId) -> &AgentType {
        &self.types[agent.index()]
    }

    /// Success probability of `agent` on `task`; 0 for the dummy.
    pub fn prob(&self, agent: AgentId, task: TaskId) -> f64 {
        if agent.is_dummy() {
            0.0
        } else {
            self.types[agent.index()].probs[task.index()]
        }
    }

    /// Attempt cost of `agent` on `task`; 0 for the dummy.
    pub fn cost(&self, agent: AgentId, task: TaskId) -> f64 {
        if agent.is_dummy() {
            0.0
        } else {
            self.types[agent.index()].costs[task.index()]
        }
    }

    /// Profile with agent `i`'s type replaced; the recombination (θ_i, θ_-i).
    pub fn with_type(&self, agent: AgentId, ty: AgentType) -> TypeProfile {
        let mut types = self.types.clone();
        types[agent.index()] = ty;
        TypeProfile { types }
    }

    pub fn types(&self) -> &[AgentType] {
        &self.types
    }
}

/// The center's valuation over completion vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Valuation {
    /// Per-task values; a completion vector is worth the sum of its
    /// completed tasks' values.
    Additive(Vec<f64>),
    /// Explicit table over all 2^t completion vectors, indexed by mask.
    /// Limited to t ≤ 16 so exact enumeration stays tractable.
    Combinatorial(Vec<f64>),
}

/// Largest task count for which explicit combinatorial tables (and full
/// outcome enumeration generally) are allowed: 2^16 entries.
pub const MAX_ENUMERATION_TASKS: usize = 16;

impl Valuation {
    pub fn additive(values: Vec<f64>) -> Self {
        Valuation::Additive(values)
    }

    /// Builds a combinatorial valuation from a dense table indexed by
    /// completion mask. The table length must be a power of two ≤ 2^16.
    pub fn combinatorial(table: Vec<f64>) -> Result<Self, Error> {
        if !table.len().is_power_of_two() {
            return Err(Error::Structure(format!(
                "combinatorial value table must have 2^t entries, got {}",
                table.len()
            )));
        }
        let t = table.len().trailing_zeros() as usize;
        if t > MAX_ENUMERATION_TASKS {
            return Err(Error::EnumerationCapExceeded { tasks: t, cap: MAX_ENUMERATION_TASKS });
        }
        Ok(Valuation::Combinatorial(table))
    }

    pub fn num_tasks(&self) -> usize {
        match self {
            Valuation::Additive(values) => values.len(),
            Valuation::Combinatorial(table) => table.len().trailing_zeros() as usize,
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, Valuation::Additive(_))
    }

    /// Value of a completion mask.
    pub fn value(&self, mask: u64) -> f64 {
        match self {
            Valuation::Additive(values) => {
                let mut total = 0.0;
                let mut bits = mask;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    total += values[i];
                    bits &= bits - 1;
                }
                total
            }
            Valuation::Combinatorial(table) => table[mask as usize],
        }
    }
}

/// Direct prerequisites per task. A task can be attempted only once all of
/// its prerequisites have been completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyDag {
    prereqs: Vec<Vec<TaskId>>,
}

impl DependencyDag {
    /// DAG with no dependencies.
    pub fn empty(num_tasks: usize) -> Self {
        DependencyDag { prereqs: vec![Vec::new(); num_tasks] }
    }

    /// Builds from `(task, requires)` edges. Cycles and self-edges are
    /// representable; [`crate::validate_scenario`] reports them.
    pub fn from_edges(num_tasks: usize, edges: &[(TaskId, TaskId)]) -> Self {
        let mut prereqs = vec![Vec::new(); num_tasks];
        for &(task, requires) in edges {
            let list = &mut prereqs[task.index()];
            if !list.contains(&requires) {
                list.push(requires);
            }
        }
        for list in &mut prereqs {
            list.sort();
        }
        DependencyDag { prereqs }
    }

    /// Chain 1→2→…→t: each task requires its predecessor.
    pub fn chain(num_tasks: usize) -> Self {
        let edges: Vec<_> = (1..num_tasks)
            .map(|i| (TaskId::from_index(i), TaskId::from_index(i - 1)))
            .collect();
        DependencyDag::from_edges(num_tasks, &edges)
    }

    pub fn num_tasks(&self) -> usize {
        self.prereqs.len()
    }

    pub fn has_edges(&self) -> bool {
        self.prereqs.iter().any(|p| !p.is_empty())
    }

    pub fn direct_prereqs(&self, task: TaskId) -> &[TaskId] {
        &self.prereqs[task.index()]
    }

    /// Bitmask of direct prerequisites.
    pub fn prereq_mask(&self, task: TaskId) -> u64 {
        self.prereqs[task.index()].iter().fold(0u64, |m, p| m | (1 << p.index()))
    }

    /// `(task, requires)` edge list, sorted.
    pub fn edges(&self) -> Vec<(TaskId, TaskId)> {
        let mut edges = Vec::new();
        for (i, list) in self.prereqs.iter().enumerate() {
            for &p in list {
                edges.push((TaskId::from_index(i), p));
            }
        }
        edges
    }

    /// Canonical topological order: among tasks whose prerequisites are all
    /// scheduled, the lowest task number goes first. `None` if cyclic.
    pub fn topological_order(&self) -> Option<Vec<TaskId>> {
        let t = self.num_tasks();
        let mut placed = vec![false; t];
        let mut order = Vec::with_capacity(t);
        for _ in 0..t {
            let next = (0..t).find(|&i| {
                !placed[i] && self.prereqs[i].iter().all(|p| placed[p.index()])
            })?;
            placed[next] = true;
            order.push(TaskId::from_index(next));
        }
        Some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// All transitive prerequisites of `task`, excluding `task` itself.
    pub fn ancestor_closure(&self, task: TaskId) -> Result<BTreeSet<TaskId>, Error> {
        if task.index() >= self.num_tasks() {
            return Err(Error::UnknownTask { task: task.number(), num_tasks: self.num_tasks() });
        }
        let mut seen = vec![false; self.num_tasks()];
        let mut stack: Vec<TaskId> = self.prereqs[task.index()].clone();
        let mut closure = BTreeSet::new();
        while let Some(j) = stack.pop() {
            if seen[j.index()] {
                continue;
            }
            seen[j.index()] = true;
            closure.insert(j);
            stack.extend_from_slice(&self.prereqs[j.index()]);
        }
        Ok(closure)
    }

    /// Ancestor-closure bitmask for every task. `None` if cyclic.
    pub fn ancestor_masks(&self) -> Option<Vec<u64>> {
        let order = self.topological_order()?;
        let mut masks = vec![0u64; self.num_tasks()];
        for &task in &order {
            let mut m = 0u64;
            for &p in &self.prereqs[task.index()] {
                m |= masks[p.index()] | (1 << p.index());
            }
            masks[task.index()] = m;
        }
        Some(masks)
    }
}

/// Which agent owns each task. Unallocated tasks belong to the dummy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    owners: Vec<AgentId>,
}

impl Assignment {
    pub fn new(owners: Vec<AgentId>) -> Self {
        Assignment { owners }
    }

    pub fn all_dummy(num_tasks: usize) -> Self {
        Assignment { owners: vec![AgentId::DUMMY; num_tasks] }
    }

    pub fn num_tasks(&self) -> usize {
        self.owners.len()
    }

    pub fn owner(&self, task: TaskId) -> AgentId {
        self.owners[task.index()]
    }

    pub fn owners(&self) -> &[AgentId] {
        &self.owners
    }

    pub fn tasks_of(&self, agent: AgentId) -> TaskSet {
        self.owners
            .iter()
            .enumerate()
            .filter(|(_, &o)| o == agent)
            .map(|(i, _)| TaskId::from_index(i))
            .collect()
    }

    pub fn is_assigned(&self, agent: AgentId) -> bool {
        self.owners.contains(&agent)
    }

    pub fn tasks(&self) -> impl Iterator<Item = (TaskId, AgentId)> + '_ {
        self.owners.iter().enumerate().map(|(i, &o)| (TaskId::from_index(i), o))
    }
}

/// One complete problem instance: what the center values, how tasks depend
/// on each other, what the agents truly are, and what they claimed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub valuation: Valuation,
    pub dag: DependencyDag,
    pub true_types: TypeProfile,
    pub declared_types: TypeProfile,
}

impl Scenario {
    /// Scenario in which every agent declared truthfully.
    pub fn truthful(valuation: Valuation, dag: DependencyDag, types: TypeProfile) -> Self {
        Scenario { valuation, dag, declared_types: types.clone(), true_types: types }
    }

    pub fn with_declared(
        valuation: Valuation,
        dag: DependencyDag,
        true_types: TypeProfile,
        declared_types: TypeProfile,
    ) -> Self {
        Scenario { valuation, dag, true_types, declared_types }
    }

    pub fn num_tasks(&self) -> usize {
        self.valuation.num_tasks()
    }

    pub fn num_agents(&self) -> usize {
        self.true_types.num_agents()
    }
}

/// Which of a scenario's two profiles a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileRole {
    True,
    Declared,
}

impl fmt::Display for ProfileRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileRole::True => f.write_str("true"),
            ProfileRole::Declared => f.write_str("declared"),
        }
    }
}

/// One violated scenario invariant. Violations are data, not faults: a
/// malformed scenario produces a list of these rather than an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NoTasks,
    NoAgents,
    TaskCountMismatch { component: String, expected: usize, actual: usize },
    LengthMismatch { profile: ProfileRole, agent: AgentId, field: String, expected: usize, actual: usize },
    ProbabilityOutOfRange { profile: ProfileRole, agent: AgentId, task: TaskId, value: f64 },
    NegativeCost { profile: ProfileRole, agent: AgentId, task: TaskId, value: f64 },
    NegativeValue { completion: CompletionVector, value: f64 },
    NonzeroEmptyValue { value: f64 },
    NonMonotoneValuation { lower: CompletionVector, higher: CompletionVector },
    CombinatorialTooLarge { tasks: usize },
    SelfDependency { task: TaskId },
    DependencyCycle,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoTasks => write!(f, "t >= 1 required"),
            Violation::NoAgents => write!(f, "n >= 1 required"),
            Violation::TaskCountMismatch { component, expected, actual } => {
                write!(f, "{component} covers {actual} tasks, expected {expected}")
            }
            Violation::LengthMismatch { profile, agent, field, expected, actual } => write!(
                f,
                "{profile} profile, agent {agent}: {field} has {actual} entries, expected {expected}"
            ),
            Violation::ProbabilityOutOfRange { profile, agent, task, value } => write!(
                f,
                "{profile} profile, agent {agent}, task {task}: probability {value} out of [0,1]"
            ),
            Violation::NegativeCost { profile, agent, task, value } => {
                write!(f, "{profile} profile, agent {agent}, task {task}: negative cost {value}")
            }
            Violation::NegativeValue { completion, value } => {
                write!(f, "valuation of {completion} is negative ({value})")
            }
            Violation::NonzeroEmptyValue { value } => {
                write!(f, "V(0…0) must be 0, got {value}")
            }
            Violation::NonMonotoneValuation { lower, higher } => {
                write!(f, "valuation not monotone: V({lower}) > V({higher})")
            }
            Violation::CombinatorialTooLarge { tasks } => {
                write!(f, "combinatorial valuation limited to {MAX_ENUMERATION_TASKS} tasks, got {tasks}")
            }
            Violation::SelfDependency { task } => write!(f, "task {task} depends on itself"),
            Violation::DependencyCycle => write!(f, "dependency cycle"),
        }
    }
}

fn check_profile(
    profile: &TypeProfile,
    role: ProfileRole,
    num_tasks: usize,
    violations: &mut Vec<Violation>,
) {
    for agent in profile.agents() {
        let ty = profile.get(agent);
        if ty.costs.len() != num_tasks {
            violations.push(Violation::LengthMismatch {
                profile: role,
                agent,
                field: "costs".into(),
                expected: num_tasks,
                actual: ty.costs.len(),
            });
        }
        if ty.probs.len() != num_tasks {
            violations.push(Violation::LengthMismatch {
                profile: role,
                agent,
                field: "probs".into(),
                expected: num_tasks,
                actual: ty.probs.len(),
            });
        }
        for (i, &p) in ty.probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                violations.push(Violation::ProbabilityOutOfRange {
                    profile: role,
                    agent,
                    task: TaskId::from_index(i),
                    value: p,
                });
            }
        }
        for (i, &c) in ty.costs.iter().enumerate() {
            if !(c >= 0.0) || !c.is_finite() {
                violations.push(Violation::NegativeCost {
                    profile: role,
                    agent,
                    task: TaskId::from_index(i),
                    value: c,
                });
            }
        }
    }
}

/// Checks every scenario invariant and returns the full list of violations;
/// an empty list means the scenario is valid.
pub fn validate_scenario(scenario: &Scenario) -> Vec<Violation> {
    let mut violations = Vec::new();
    let t = scenario.num_tasks();
    if t == 0 {
        violations.push(Violation::NoTasks);
    }
    if scenario.num_agents() == 0 {
        violations.push(Violation::NoAgents);
    }

    if scenario.dag.num_tasks() != t {
        violations.push(Violation::TaskCountMismatch {
            component: "dependency DAG".into(),
            expected: t,
            actual: scenario.dag.num_tasks(),
        });
    }
    if scenario.true_types.num_agents() != scenario.declared_types.num_agents() {
        violations.push(Violation::TaskCountMismatch {
            component: "declared profile (agent count)".into(),
            expected: scenario.true_types.num_agents(),
            actual: scenario.declared_types.num_agents(),
        });
    }

    check_profile(&scenario.true_types, ProfileRole::True, t, &mut violations);
    check_profile(&scenario.declared_types, ProfileRole::Declared, t, &mut violations);

    match &scenario.valuation {
        Valuation::Additive(values) => {
            for (i, &v) in values.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    violations.push(Violation::NegativeValue {
                        completion: CompletionVector::from_mask(1 << i, t),
                        value: v,
                    });
                }
            }
        }
        Valuation::Combinatorial(table) => {
            let vt = table.len().trailing_zeros() as usize;
            if vt > MAX_ENUMERATION_TASKS {
                violations.push(Violation::CombinatorialTooLarge { tasks: vt });
            } else {
                if table[0] != 0.0 {
                    violations.push(Violation::NonzeroEmptyValue { value: table[0] });
                }
                for (mask, &v) in table.iter().enumerate() {
                    if !(v >= 0.0) || !v.is_finite() {
                        violations.push(Violation::NegativeValue {
                            completion: CompletionVector::from_mask(mask as u64, vt),
                            value: v,
                        });
                    }
                }
                // Monotonicity: adding one completed task never lowers value.
                for mask in 0..table.len() {
                    for bit in 0..vt {
                        if mask & (1 << bit) == 0 {
                            let higher = mask | (1 << bit);
                            if table[mask] > table[higher] + EPSILON {
                                violations.push(Violation::NonMonotoneValuation {
                                    lower: CompletionVector::from_mask(mask as u64, vt),
                                    higher: CompletionVector::from_mask(higher as u64, vt),
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    let mut self_dep = false;
    for i in 0..scenario.dag.num_tasks() {
        let task = TaskId::from_index(i);
        if scenario.dag.direct_prereqs(task).contains(&task) {
            violations.push(Violation::SelfDependency { task });
            self_dep = true;
        }
    }
    if !self_dep && !scenario.dag.is_acyclic() {
        violations.push(Violation::DependencyCycle);
    }

    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_scenario() -> Scenario {
        let types = TypeProfile::new(vec![
            AgentType::new(vec![30.0], vec![0.5]),
            AgentType::new(vec![100.0], vec![1.0]),
            AgentType::new(vec![60.0], vec![0.9]),
        ]);
        Scenario::truthful(Valuation::additive(vec![210.0]), DependencyDag::empty(1), types)
    }

    #[test]
    fn valid_scenario_has_no_violations() {
        assert!(validate_scenario(&table1_scenario()).is_empty());
    }

    #[test]
    fn out_of_range_probability_is_reported() {
        let mut s = table1_scenario();
        s.true_types = s.true_types.with_type(
            AgentId::new(2),
            AgentType::new(vec![100.0], vec![1.3]),
        );
        let violations = validate_scenario(&s);
        assert!(violations.iter().any(|v| matches!(
            v,
            Violation::ProbabilityOutOfRange { value, .. } if *value == 1.3
        )));
    }

    #[test]
    fn two_cycle_is_reported() {
        let t1 = TaskId::from_index(0);
        let t2 = TaskId::from_index(1);
        let dag = DependencyDag::from_edges(2, &[(t2, t1), (t1, t2)]);
        let types = TypeProfile::new(vec![AgentType::new(vec![1.0, 1.0], vec![0.5, 0.5])]);
        let s = Scenario::truthful(Valuation::additive(vec![1.0, 1.0]), dag, types);
        assert!(validate_scenario(&s).contains(&Violation::DependencyCycle));
    }

    #[test]
    fn ancestor_closure_of_chain() {
        let dag = DependencyDag::chain(3);
        let closure = dag.ancestor_closure(TaskId::from_index(2)).unwrap();
        let expected: BTreeSet<_> = [TaskId::from_index(0), TaskId::from_index(1)].into();
        assert_eq!(closure, expected);
    }

    #[test]
    fn ancestor_closure_without_edges_is_empty() {
        let dag = DependencyDag::empty(4);
        for i in 0..4 {
            assert!(dag.ancestor_closure(TaskId::from_index(i)).unwrap().is_empty());
        }
    }

    #[test]
    fn ancestor_closure_of_diamond() {
        // 2 and 3 require 1; 4 requires 2 and 3.
        let ids: Vec<TaskId> = (0..4).map(TaskId::from_index).collect();
        let dag = DependencyDag::from_edges(
            4,
            &[(ids[1], ids[0]), (ids[2], ids[0]), (ids[3], ids[1]), (ids[3], ids[2])],
        );
        let closure = dag.ancestor_closure(ids[3]).unwrap();
        let expected: BTreeSet<_> = [ids[0], ids[1], ids[2]].into();
        assert_eq!(closure, expected);
    }

    #[test]
    fn ancestor_closure_rejects_unknown_task() {
        let dag = DependencyDag::empty(2);
        assert!(dag.ancestor_closure(TaskId::from_index(5)).is_err());
    }

    #[test]
    fn recombining_a_profile_is_exact() {
        let profile = table1_scenario().true_types;
        for agent in profile.agents() {
            let rebuilt = profile.with_type(agent, profile.get(agent).clone());
            assert_eq!(rebuilt, profile);
        }
    }

    #[test]
    fn bitstring_round_trip_keeps_task_one_leftmost() {
        let v = CompletionVector::from_bitstring("10").unwrap();
        assert!(v.is_done(TaskId::from_index(0)));
        assert!(!v.is_done(TaskId::from_index(1)));
        assert_eq!(v.bitstring(), "10");
        assert_eq!(CompletionVector::from_bitstring("102"), None);
    }

    #[test]
    fn topological_order_prefers_low_task_numbers() {
        // 1 requires 3: order must be 2? no — ready set {2,3} → 2, then 3, then 1.
        let t = |i| TaskId::from_index(i);
        let dag = DependencyDag::from_edges(3, &[(t(0), t(2))]);
        let order = dag.topological_order().unwrap();
        assert_eq!(order, vec![t(1), t(2), t(0)]);
    }

    #[test]
    fn non_monotone_combinatorial_valuation_is_reported() {
        let table = vec![0.0, 3.0, 0.0, 2.0]; // V("10")=3 > V("11")=2
        let v = Valuation::combinatorial(table).unwrap();
        let types = TypeProfile::new(vec![AgentType::new(vec![0.0, 0.0], vec![1.0, 1.0])]);
        let s = Scenario::truthful(v, DependencyDag::empty(2), types);
        assert!(validate_scenario(&s)
            .iter()
            .any(|v| matches!(v, Violation::NonMonotoneValuation { .. })));
    }
}
