//! Components, block-diagram structure, validation and the structure function.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A failure source with a constant failure rate (per hour).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub display_name: String,
    pub failure_rate: f64,
}

impl Component {
    /// A component whose display name is its id.
    pub fn new(id: impl Into<String>, failure_rate: f64) -> Self {
        let id = id.into();
        Self {
            display_name: id.clone(),
            id,
            failure_rate,
        }
    }

    pub fn with_display_name(mut self, name: impl Into<String>) -> Self {
        self.display_name = name.into();
        self
    }
}

/// One independent occurrence of a component in the diagram.
///
/// Displayed as `id[index]`; parsed from either `id[index]` or a bare `id`
/// (index 0).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceId {
    pub component: String,
    pub index: usize,
}

impl InstanceId {
    pub fn new(component: impl Into<String>, index: usize) -> Self {
        Self {
            component: component.into(),
            index,
        }
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.component, self.index)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed instance reference `{0}` (expected `id` or `id[index]`)")]
pub struct InstanceParseError(pub String);

impl FromStr for InstanceId {
    type Err = InstanceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InstanceParseError(s.to_string());
        let (id, index) = match s.split_once('[') {
            None => (s, 0),
            Some((id, rest)) => {
                let digits = rest.strip_suffix(']').ok_or_else(bad)?;
                (id, digits.parse().map_err(|_| bad())?)
            }
        };
        if !is_identifier(id) {
            return Err(bad());
        }
        Ok(InstanceId::new(id, index))
    }
}

/// `[a-zA-Z_][a-zA-Z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The structure of a system: a tree of series and parallel blocks over
/// component instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BlockExpr {
    Component(InstanceId),
    Series(Vec<BlockExpr>),
    Parallel(Vec<BlockExpr>),
}

impl BlockExpr {
    /// A reference to `component`, instance 0. [`SystemModel::new`]
    /// renumbers instances, so repeated `leaf` calls for the same id are fine.
    pub fn leaf(component: impl Into<String>) -> Self {
        BlockExpr::Component(InstanceId::new(component, 0))
    }

    pub fn series(children: impl IntoIterator<Item = BlockExpr>) -> Self {
        BlockExpr::Series(children.into_iter().collect())
    }

    pub fn parallel(children: impl IntoIterator<Item = BlockExpr>) -> Self {
        BlockExpr::Parallel(children.into_iter().collect())
    }

    /// Instances in left-to-right order.
    pub fn instances(&self) -> Vec<&InstanceId> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |id| out.push(id));
        out
    }

    fn visit_leaves<'a>(&'a self, f: &mut impl FnMut(&'a InstanceId)) {
        match self {
            BlockExpr::Component(id) => f(id),
            BlockExpr::Series(cs) | BlockExpr::Parallel(cs) => {
                for c in cs {
                    c.visit_leaves(f);
                }
            }
        }
    }

    fn renumber(&mut self, counters: &mut HashMap<String, usize>) {
        match self {
            BlockExpr::Component(id) => {
                let next = counters.entry(id.component.clone()).or_insert(0);
                id.index = *next;
                *next += 1;
            }
            BlockExpr::Series(cs) | BlockExpr::Parallel(cs) => {
                for c in cs {
                    c.renumber(counters);
                }
            }
        }
    }

    /// True when only series blocks remain once arity-1 wrappers are
    /// stripped.
    pub fn is_pure_series(&self) -> bool {
        match self {
            BlockExpr::Component(_) => true,
            BlockExpr::Series(cs) => cs.iter().all(BlockExpr::is_pure_series),
            BlockExpr::Parallel(cs) => cs.len() == 1 && cs[0].is_pure_series(),
        }
    }

    /// The subexpression at `path` (child indices from this node).
    pub fn node_at(&self, path: &NodePath) -> Option<&BlockExpr> {
        let mut node = self;
        for &i in &path.0 {
            node = match node {
                BlockExpr::Component(_) => return None,
                BlockExpr::Series(cs) | BlockExpr::Parallel(cs) => cs.get(i)?,
            };
        }
        Some(node)
    }

    /// Path of the leaf referring to `instance`, if any.
    pub fn path_of(&self, instance: &InstanceId) -> Option<NodePath> {
        fn go(e: &BlockExpr, target: &InstanceId, path: &mut Vec<usize>) -> bool {
            match e {
                BlockExpr::Component(id) => id == target,
                BlockExpr::Series(cs) | BlockExpr::Parallel(cs) => {
                    for (i, c) in cs.iter().enumerate() {
                        path.push(i);
                        if go(c, target, path) {
                            return true;
                        }
                        path.pop();
                    }
                    false
                }
            }
        }
        let mut path = Vec::new();
        go(self, instance, &mut path).then_some(NodePath(path))
    }
}

/// Child indices leading from the root to a node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        NodePath(p)
    }
}

/// 1-based line and column in model source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcePos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Something in a model that a diagnostic can point at.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Locus {
    Component(String),
    Node(NodePath),
}

pub type SourceTable = HashMap<Locus, SourcePos>;

/// A named system: declared components plus the root block expression.
///
/// Equality compares name, components and structure; source positions are
/// ignored.
#[derive(Clone, Debug)]
pub struct SystemModel {
    name: String,
    components: Vec<Component>,
    root: BlockExpr,
    sources: Option<SourceTable>,
}

impl PartialEq for SystemModel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.components == other.components && self.root == other.root
    }
}

impl SystemModel {
    /// Builds a model, assigning instance indices left to right so that each
    /// repeated reference to one component becomes its own instance.
    pub fn new(name: impl Into<String>, components: Vec<Component>, mut root: BlockExpr) -> Self {
        root.renumber(&mut HashMap::new());
        Self::from_parts(name, components, root)
    }

    /// Builds a model keeping the instance indices in `root` as given.
    pub fn from_parts(name: impl Into<String>, components: Vec<Component>, root: BlockExpr) -> Self {
        Self {
            name: name.into(),
            components,
            root,
            sources: None,
        }
    }

    pub fn with_sources(mut self, sources: SourceTable) -> Self {
        self.sources = Some(sources);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Components in declaration order.
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn root(&self) -> &BlockExpr {
        &self.root
    }

    pub fn sources(&self) -> Option<&SourceTable> {
        self.sources.as_ref()
    }

    pub fn position_of(&self, locus: &Locus) -> Option<SourcePos> {
        self.sources.as_ref()?.get(locus).copied()
    }

    /// Instances in left-to-right order of the root expression.
    pub fn instances(&self) -> Vec<InstanceId> {
        self.root.instances().into_iter().cloned().collect()
    }

    /// Instances ordered by component declaration, then instance index.
    pub fn instances_in_declaration_order(&self) -> Vec<InstanceId> {
        let rank: HashMap<&str, usize> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect();
        let mut out = self.instances();
        out.sort_by_key(|id| (rank.get(id.component.as_str()).copied().unwrap_or(usize::MAX), id.index));
        out
    }

    pub fn contains_instance(&self, instance: &InstanceId) -> bool {
        self.root.path_of(instance).is_some()
    }

    /// Resolves a bare component id to its only instance. Fails when the id
    /// is unknown or ambiguous.
    pub fn resolve_instance(&self, text: &str) -> Result<InstanceId, ModelError> {
        let parsed: InstanceId = text
            .parse()
            .map_err(|_| ModelError::UnknownInstance(text.to_string()))?;
        if text.contains('[') {
            return if self.contains_instance(&parsed) {
                Ok(parsed)
            } else {
                Err(ModelError::UnknownInstance(text.to_string()))
            };
        }
        let matching: Vec<_> = self
            .instances()
            .into_iter()
            .filter(|i| i.component == parsed.component)
            .collect();
        match matching.len() {
            0 => Err(ModelError::UnknownInstance(text.to_string())),
            1 => Ok(matching.into_iter().next().unwrap()),
            _ => Err(ModelError::AmbiguousInstance {
                component: text.to_string(),
                candidates: matching.iter().map(ToString::to_string).collect(),
            }),
        }
    }

    /// Returns a copy of this model with the root replaced; instance indices
    /// are reassigned left to right.
    pub fn with_root(&self, root: BlockExpr) -> Self {
        SystemModel::new(self.name.clone(), self.components.clone(), root)
    }

    /// Flattens the tree into slot form: leaves become indices into
    /// [`SlotTree::instances`].
    pub(crate) fn compile(&self) -> Result<SlotTree, ModelError> {
        let rates: HashMap<&str, f64> = self
            .components
            .iter()
            .map(|c| (c.id.as_str(), c.failure_rate))
            .collect();
        let mut instances = Vec::new();
        let mut failure_rates = Vec::new();
        fn go(
            e: &BlockExpr,
            rates: &HashMap<&str, f64>,
            instances: &mut Vec<InstanceId>,
            failure_rates: &mut Vec<f64>,
        ) -> Result<Slot, ModelError> {
            Ok(match e {
                BlockExpr::Component(id) => {
                    let rate = *rates
                        .get(id.component.as_str())
                        .ok_or_else(|| ModelError::UnknownComponent(id.component.clone()))?;
                    instances.push(id.clone());
                    failure_rates.push(rate);
                    Slot::Leaf(instances.len() - 1)
                }
                BlockExpr::Series(cs) => Slot::Series(
                    cs.iter()
                        .map(|c| go(c, rates, instances, failure_rates))
                        .collect::<Result<_, _>>()?,
                ),
                BlockExpr::Parallel(cs) => Slot::Parallel(
                    cs.iter()
                        .map(|c| go(c, rates, instances, failure_rates))
                        .collect::<Result<_, _>>()?,
                ),
            })
        }
        let root = go(&self.root, &rates, &mut instances, &mut failure_rates)?;
        Ok(SlotTree {
            root,
            instances,
            failure_rates,
        })
    }
}

/// A probability carried together with its complement, so that both stay
/// accurate when either is close to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Survival {
    pub up: f64,
    pub down: f64,
}

impl Survival {
    /// e^(−λt) and 1 − e^(−λt).
    pub(crate) fn exponential(failure_rate: f64, t: f64) -> Self {
        let x = -failure_rate * t;
        // `0.0 -` rather than negation, so a zero complement is +0.
        Survival {
            up: x.exp(),
            down: 0.0 - x.exp_m1(),
        }
    }

    pub(crate) fn from_reliability(r: f64) -> Self {
        Survival { up: r, down: 1.0 - r }
    }

    fn ln_up(self) -> f64 {
        if self.down < 0.5 {
            (-self.down).ln_1p()
        } else {
            self.up.ln()
        }
    }

    fn ln_down(self) -> f64 {
        if self.up < 0.5 {
            (-self.up).ln_1p()
        } else {
            self.down.ln()
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Slot {
    Leaf(usize),
    Series(Vec<Slot>),
    Parallel(Vec<Slot>),
}

impl Slot {
    /// Composes per-slot survival probabilities through the tree.
    pub(crate) fn reliability(&self, slots: &[Survival]) -> Survival {
        match self {
            Slot::Leaf(i) => slots[*i],
            Slot::Series(cs) | Slot::Parallel(cs) if cs.len() == 1 => cs[0].reliability(slots),
            Slot::Series(cs) => {
                let parts = cs.iter().map(|c| c.reliability(slots));
                let (up, ln_up) = parts.fold((1.0, 0.0), |(p, l), s| (p * s.up, l + s.ln_up()));
                Survival {
                    up,
                    down: 0.0 - ln_up.exp_m1(),
                }
            }
            Slot::Parallel(cs) => {
                let parts = cs.iter().map(|c| c.reliability(slots));
                let (down, ln_down) = parts.fold((1.0, 0.0), |(p, l), s| (p * s.down, l + s.ln_down()));
                Survival {
                    up: 0.0 - ln_down.exp_m1(),
                    down,
                }
            }
        }
    }

    /// Series fails at its first child failure, parallel at its last.
    pub(crate) fn lifetime(&self, slots: &[f64]) -> f64 {
        match self {
            Slot::Leaf(i) => slots[*i],
            Slot::Series(cs) => cs.iter().map(|c| c.lifetime(slots)).fold(f64::INFINITY, f64::min),
            Slot::Parallel(cs) => cs.iter().map(|c| c.lifetime(slots)).fold(0.0, f64::max),
        }
    }

    pub(crate) fn is_up(&self, slots: &[bool]) -> bool {
        match self {
            Slot::Leaf(i) => slots[*i],
            Slot::Series(cs) => cs.iter().all(|c| c.is_up(slots)),
            Slot::Parallel(cs) => cs.iter().any(|c| c.is_up(slots)),
        }
    }
}

/// A model flattened to slot indices, with failure rates resolved.
#[derive(Clone, Debug)]
pub(crate) struct SlotTree {
    pub root: Slot,
    pub instances: Vec<InstanceId>,
    pub failure_rates: Vec<f64>,
}

impl SlotTree {
    pub(crate) fn slot_of(&self, instance: &InstanceId) -> Option<usize> {
        self.instances.iter().position(|i| i == instance)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("`{component}` has several instances; pick one of {}", candidates.join(", "))]
    AmbiguousInstance { component: String, candidates: Vec<String> },
    #[error("state assignment has no entry for instance `{0}`")]
    MissingInstance(InstanceId),
    #[error("invalid model: {0}")]
    Invalid(ValidationReport),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    NoComponents,
    EmptyId,
    MalformedId,
    DuplicateComponent,
    InvalidFailureRate,
    UndeclaredComponent,
    DuplicateInstance,
    EmptyBlock,
    UnreferencedComponent,
}

/// One validation finding. `subject` names the offending id or instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub kind: IssueKind,
    pub subject: String,
    pub message: String,
    pub position: Option<SourcePos>,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.position {
            Some(p) => write!(f, "{p}: {sev}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.errors().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Checks every model invariant. Problems are returned as data; an empty
/// error list means the model can be evaluated.
pub fn validate_model(model: &SystemModel) -> ValidationReport {
    let mut issues = Vec::new();
    let mut push = |severity, kind, subject: &str, message: String, locus: Option<Locus>| {
        issues.push(ValidationIssue {
            severity,
            kind,
            subject: subject.to_string(),
            message,
            position: locus.and_then(|l| model.position_of(&l)),
        });
    };

    if model.components.is_empty() {
        push(
            Severity::Error,
            IssueKind::NoComponents,
            &model.name,
            "model declares no components".into(),
            None,
        );
    }

    let mut declared = BTreeSet::new();
    for c in &model.components {
        let locus = Some(Locus::Component(c.id.clone()));
        if c.id.is_empty() {
            push(
                Severity::Error,
                IssueKind::EmptyId,
                "",
                "component id is empty".into(),
                locus.clone(),
            );
        } else if !is_identifier(&c.id) {
            push(
                Severity::Error,
                IssueKind::MalformedId,
                &c.id,
                format!("component id `{}` is not an identifier", c.id),
                locus.clone(),
            );
        }
        if !declared.insert(c.id.as_str()) {
            push(
                Severity::Error,
                IssueKind::DuplicateComponent,
                &c.id,
                format!("component `{}` is declared more than once", c.id),
                locus.clone(),
            );
        }
        if !(c.failure_rate.is_finite() && c.failure_rate >= 0.0) {
            push(
                Severity::Error,
                IssueKind::InvalidFailureRate,
                &c.id,
                format!(
                    "component `{}` has failure rate {}; expected a finite value >= 0",
                    c.id, c.failure_rate
                ),
                locus,
            );
        }
    }

    let mut seen_instances = BTreeSet::new();
    let mut referenced = BTreeSet::new();
    let mut stack = vec![(&model.root, NodePath::root())];
    while let Some((node, path)) = stack.pop() {
        match node {
            BlockExpr::Component(id) => {
                referenced.insert(id.component.as_str());
                let locus = Some(Locus::Node(path));
                if !declared.contains(id.component.as_str()) {
                    push(
                        Severity::Error,
                        IssueKind::UndeclaredComponent,
                        &id.component,
                        format!("reference to undeclared component `{}`", id.component),
                        locus,
                    );
                } else if !seen_instances.insert(id.clone()) {
                    push(
                        Severity::Error,
                        IssueKind::DuplicateInstance,
                        &id.to_string(),
                        format!("instance `{id}` appears more than once"),
                        locus,
                    );
                }
            }
            BlockExpr::Series(cs) | BlockExpr::Parallel(cs) => {
                if cs.is_empty() {
                    let kind = if matches!(node, BlockExpr::Series(_)) {
                        "series"
                    } else {
                        "parallel"
                    };
                    push(
                        Severity::Error,
                        IssueKind::EmptyBlock,
                        kind,
                        format!("{kind} block has no children"),
                        Some(Locus::Node(path.clone())),
                    );
                }
                for (i, c) in cs.iter().enumerate().rev() {
                    stack.push((c, path.child(i)));
                }
            }
        }
    }

    for c in &model.components {
        if !referenced.contains(c.id.as_str()) {
            push(
                Severity::Warning,
                IssueKind::UnreferencedComponent,
                &c.id,
                format!("component `{}` is declared but never used", c.id),
                Some(Locus::Component(c.id.clone())),
            );
        }
    }

    ValidationReport { issues }
}

/// Validates `model`, turning any error into [`ModelError::Invalid`].
pub fn ensure_valid(model: &SystemModel) -> Result<(), ModelError> {
    let report = validate_model(model);
    if report.is_valid() {
        Ok(())
    } else {
        Err(ModelError::Invalid(report))
    }
}

/// Functioning (`true`) or failed state of each instance.
pub type StateAssignment = BTreeMap<InstanceId, bool>;

/// Evaluates the boolean structure function: series is AND, parallel is OR.
pub fn structure_function(expr: &BlockExpr, state: &StateAssignment) -> Result<bool, ModelError> {
    match expr {
        BlockExpr::Component(id) => state
            .get(id)
            .copied()
            .ok_or_else(|| ModelError::MissingInstance(id.clone())),
        BlockExpr::Series(cs) => {
            let mut up = true;
            for c in cs {
                up &= structure_function(c, state)?;
            }
            Ok(up)
        }
        BlockExpr::Parallel(cs) => {
            let mut up = false;
            for c in cs {
                up |= structure_function(c, state)?;
            }
            Ok(up)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(kind: fn(Vec<BlockExpr>) -> BlockExpr) -> (SystemModel, InstanceId, InstanceId) {
        let m = SystemModel::new(
            "s",
            vec![Component::new("a", 1e-3), Component::new("b", 2e-3)],
            kind(vec![BlockExpr::leaf("a"), BlockExpr::leaf("b")]),
        );
        (m, InstanceId::new("a", 0), InstanceId::new("b", 0))
    }

    fn state(pairs: &[(&InstanceId, bool)]) -> StateAssignment {
        pairs.iter().map(|(i, b)| ((*i).clone(), *b)).collect()
    }

    #[test]
    fn series_and_parallel_truth() {
        let (m, a, b) = two(BlockExpr::Series);
        assert!(structure_function(m.root(), &state(&[(&a, true), (&b, true)])).unwrap());
        assert!(!structure_function(m.root(), &state(&[(&a, true), (&b, false)])).unwrap());
        let (m, a, b) = two(BlockExpr::Parallel);
        assert!(structure_function(m.root(), &state(&[(&a, false), (&b, true)])).unwrap());
        assert!(!structure_function(m.root(), &state(&[(&a, false), (&b, false)])).unwrap());
    }

    #[test]
    fn missing_state_names_instance() {
        let (m, a, _) = two(BlockExpr::Series);
        let err = structure_function(m.root(), &state(&[(&a, true)])).unwrap_err();
        assert_eq!(err, ModelError::MissingInstance(InstanceId::new("b", 0)));
        assert!(err.to_string().contains("b[0]"));
    }

    #[test]
    fn repeated_references_become_distinct_instances() {
        let m = SystemModel::new(
            "s",
            vec![Component::new("hx", 2e-5), Component::new("col", 1e-6)],
            BlockExpr::series([
                BlockExpr::leaf("hx"),
                BlockExpr::leaf("hx"),
                BlockExpr::parallel([BlockExpr::leaf("col"), BlockExpr::leaf("col")]),
            ]),
        );
        assert_eq!(
            m.instances(),
            vec![
                InstanceId::new("hx", 0),
                InstanceId::new("hx", 1),
                InstanceId::new("col", 0),
                InstanceId::new("col", 1)
            ]
        );
        assert!(validate_model(&m).issues.is_empty());
    }

    #[test]
    fn unreferenced_component_is_only_a_warning() {
        let m = SystemModel::new(
            "s",
            vec![Component::new("a", 1e-3), Component::new("spare", 1e-3)],
            BlockExpr::leaf("a"),
        );
        let r = validate_model(&m);
        assert!(r.is_valid());
        let w: Vec<_> = r.warnings().collect();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].kind, IssueKind::UnreferencedComponent);
        assert_eq!(w[0].subject, "spare");
    }

    #[test]
    fn undeclared_reference_is_one_error() {
        let m = SystemModel::new(
            "s",
            vec![Component::new("pump", 3e-6)],
            BlockExpr::series([BlockExpr::leaf("pump"), BlockExpr::leaf("pump2")]),
        );
        let r = validate_model(&m);
        let errs: Vec<_> = r.errors().collect();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].subject, "pump2");
        assert!(errs[0].message.contains("pump2"));
    }

    #[test]
    fn rate_and_structure_errors() {
        let m = SystemModel::from_parts(
            "s",
            vec![
                Component::new("neg", -1.0),
                Component::new("nan", f64::NAN),
                Component::new("inf", f64::INFINITY),
                Component::new("zero", 0.0),
                Component::new("zero", 0.0),
            ],
            BlockExpr::series([
                BlockExpr::leaf("neg"),
                BlockExpr::leaf("nan"),
                BlockExpr::leaf("inf"),
                BlockExpr::leaf("zero"),
                BlockExpr::leaf("zero"),
                BlockExpr::Parallel(vec![]),
            ]),
        );
        let kinds: Vec<_> = validate_model(&m).errors().map(|e| e.kind.clone()).collect();
        assert_eq!(kinds.iter().filter(|k| **k == IssueKind::InvalidFailureRate).count(), 3);
        assert!(kinds.contains(&IssueKind::DuplicateComponent));
        assert!(kinds.contains(&IssueKind::DuplicateInstance));
        assert!(kinds.contains(&IssueKind::EmptyBlock));
    }

    #[test]
    fn empty_model_is_invalid() {
        let m = SystemModel::new("s", vec![], BlockExpr::Series(vec![]));
        let kinds: Vec<_> = validate_model(&m).errors().map(|e| e.kind.clone()).collect();
        assert!(kinds.contains(&IssueKind::NoComponents));
        assert!(ensure_valid(&m).is_err());
    }

    #[test]
    fn instance_id_parsing() {
        assert_eq!("heater".parse(), Ok(InstanceId::new("heater", 0)));
        assert_eq!("hx[1]".parse(), Ok(InstanceId::new("hx", 1)));
        assert!("hx[".parse::<InstanceId>().is_err());
        assert!("hx[x]".parse::<InstanceId>().is_err());
        assert!("1hx".parse::<InstanceId>().is_err());
        assert_eq!(InstanceId::new("hx", 1).to_string(), "hx[1]");
    }

    #[test]
    fn resolve_bare_ids() {
        let m = SystemModel::new(
            "s",
            vec![Component::new("hx", 2e-5), Component::new("h", 1e-6)],
            BlockExpr::series([BlockExpr::leaf("hx"), BlockExpr::leaf("hx"), BlockExpr::leaf("h")]),
        );
        assert_eq!(m.resolve_instance("h"), Ok(InstanceId::new("h", 0)));
        assert_eq!(m.resolve_instance("hx[1]"), Ok(InstanceId::new("hx", 1)));
        assert!(matches!(
            m.resolve_instance("hx"),
            Err(ModelError::AmbiguousInstance { .. })
        ));
        assert!(matches!(
            m.resolve_instance("hx[2]"),
            Err(ModelError::UnknownInstance(_))
        ));
        assert!(matches!(
            m.resolve_instance("ghost"),
            Err(ModelError::UnknownInstance(_))
        ));
    }
}
