//! Witness data model, YAML ingestion and emission, and structural schema
//! validation for correctness witnesses (format 2.0 and the 2.1 extension
//! with `function_contract` entries).
//!
//! A witness document is a YAML sequence holding a single `invariant_set`
//! entry:
//!
//! ```yaml
//! - entry_type: invariant_set
//!   metadata:
//!     format_version: "2.1"
//!     producer: { name: some-verifier, version: "1.0" }
//!   content:
//!     - invariant:
//!         type: function_contract
//!         location: { file_name: product.c, line: 3, column: 1, function: product }
//!         format: acsl_expression
//!         requires: "b >= 0"
//!         ensures: "\\result == a * b"
//! ```
//!
//! Expression payloads are kept as raw text here; [`crate::expr`] parses them.

use std::collections::HashMap;
use std::fmt;

use yaml_rust2::parser::{Event, MarkedEventReceiver, Parser};
use yaml_rust2::scanner::{Marker, TScalarStyle};
use yaml_rust2::yaml::{Hash, Yaml};
use yaml_rust2::YamlEmitter;

use crate::diag::Diagnostic;

pub const FORMAT_VERSION_2_0: &str = "2.0";
pub const FORMAT_VERSION_2_1: &str = "2.1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExpressionFormat {
    CExpression,
    AcslExpression,
}

impl ExpressionFormat {
    pub const ALL: [ExpressionFormat; 2] = [ExpressionFormat::CExpression, ExpressionFormat::AcslExpression];

    pub fn as_str(self) -> &'static str {
        match self {
            ExpressionFormat::CExpression => "c_expression",
            ExpressionFormat::AcslExpression => "acsl_expression",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

impl fmt::Display for ExpressionFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntryKind {
    FunctionContract,
    LoopInvariant,
    LocationInvariant,
}

impl EntryKind {
    pub const ALL: [EntryKind; 3] = [
        EntryKind::FunctionContract,
        EntryKind::LoopInvariant,
        EntryKind::LocationInvariant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntryKind::FunctionContract => "function_contract",
            EntryKind::LoopInvariant => "loop_invariant",
            EntryKind::LocationInvariant => "location_invariant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Columns in witness locations are interpreted against this base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnBase {
    #[default]
    OneBased,
    ZeroBased,
}

impl ColumnBase {
    /// Converts a witness column into a 1-based column.
    pub fn to_one_based(self, column: u32) -> u32 {
        match self {
            ColumnBase::OneBased => column,
            ColumnBase::ZeroBased => column + 1,
        }
    }

    fn minimum(self) -> u64 {
        match self {
            ColumnBase::OneBased => 1,
            ColumnBase::ZeroBased => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Location {
    pub file_name: String,
    pub line: u32,
    pub column: Option<u32>,
    pub function: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EntryBody {
    FunctionContract {
        requires: Option<String>,
        ensures: Option<String>,
    },
    LoopInvariant {
        value: String,
    },
    LocationInvariant {
        value: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entry {
    pub location: Location,
    pub format: ExpressionFormat,
    pub body: EntryBody,
}

/// The text a contract clause stands for when the key is absent.
pub const DEFAULT_CLAUSE: &str = "1";

impl Entry {
    pub fn kind(&self) -> EntryKind {
        match self.body {
            EntryBody::FunctionContract { .. } => EntryKind::FunctionContract,
            EntryBody::LoopInvariant { .. } => EntryKind::LoopInvariant,
            EntryBody::LocationInvariant { .. } => EntryKind::LocationInvariant,
        }
    }

    pub fn contract(
        location: Location,
        format: ExpressionFormat,
        requires: Option<&str>,
        ensures: Option<&str>,
    ) -> Self {
        Entry {
            location,
            format,
            body: EntryBody::FunctionContract {
                requires: requires.map(str::to_owned),
                ensures: ensures.map(str::to_owned),
            },
        }
    }

    pub fn loop_invariant(location: Location, format: ExpressionFormat, value: &str) -> Self {
        Entry {
            location,
            format,
            body: EntryBody::LoopInvariant {
                value: value.to_owned(),
            },
        }
    }

    pub fn location_invariant(location: Location, format: ExpressionFormat, value: &str) -> Self {
        Entry {
            location,
            format,
            body: EntryBody::LocationInvariant {
                value: value.to_owned(),
            },
        }
    }

    /// Requires text with the default applied.
    pub fn requires_text(&self) -> Option<&str> {
        match &self.body {
            EntryBody::FunctionContract { requires, .. } => Some(requires.as_deref().unwrap_or(DEFAULT_CLAUSE)),
            _ => None,
        }
    }

    /// Ensures text with the default applied.
    pub fn ensures_text(&self) -> Option<&str> {
        match &self.body {
            EntryBody::FunctionContract { ensures, .. } => Some(ensures.as_deref().unwrap_or(DEFAULT_CLAUSE)),
            _ => None,
        }
    }

    pub fn invariant_text(&self) -> Option<&str> {
        match &self.body {
            EntryBody::LoopInvariant { value } | EntryBody::LocationInvariant { value } => Some(value),
            EntryBody::FunctionContract { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Producer {
    pub name: String,
    pub version: String,
    pub configuration: Option<String>,
    pub description: Option<String>,
    pub command_line: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Task {
    pub input_files: Vec<String>,
    /// File name to hash, in document order.
    pub input_file_hashes: Vec<(String, String)>,
    pub specification: Option<String>,
    pub data_model: Option<String>,
    pub language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub format_version: String,
    pub uuid: Option<String>,
    pub creation_time: Option<String>,
    pub producer: Producer,
    pub task: Option<Task>,
}

impl Metadata {
    pub fn new(format_version: &str, producer_name: &str, producer_version: &str) -> Self {
        Metadata {
            format_version: format_version.to_owned(),
            uuid: None,
            creation_time: None,
            producer: Producer {
                name: producer_name.to_owned(),
                version: producer_version.to_owned(),
                ..Producer::default()
            },
            task: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessSet {
    pub metadata: Metadata,
    pub entries: Vec<Entry>,
}

impl WitnessSet {
    pub fn new(metadata: Metadata) -> Self {
        WitnessSet {
            metadata,
            entries: Vec::new(),
        }
    }

    pub fn is_extended(&self) -> bool {
        self.metadata.format_version == FORMAT_VERSION_2_1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Unknown keys and entry types are errors.
    #[default]
    Strict,
    /// Unknown keys and entry types are warnings; unknown entries are dropped.
    Lenient,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub mode: ParseMode,
    pub column_base: ColumnBase,
}

#[derive(Debug, Clone)]
pub struct ParsedWitness {
    pub witness: WitnessSet,
    pub warnings: Vec<Diagnostic>,
}

/// Parses a witness document. On failure, every structural violation found is
/// returned; on success the non-fatal findings are attached as warnings.
pub fn parse_witness(text: &str, options: ParseOptions) -> Result<ParsedWitness, Vec<Diagnostic>> {
    parse_named(text, "witness", options)
}

pub fn parse_named(text: &str, source: &str, options: ParseOptions) -> Result<ParsedWitness, Vec<Diagnostic>> {
    let mut reader = Reader {
        source,
        options,
        diags: Vec::new(),
    };
    let witness = match load_yaml(text) {
        Ok(root) => reader.witness(&root),
        Err(diag) => {
            let (line, column) = (diag_line(&diag), diag_col(&diag));
            reader.diags.push(diag.at(source, line, column));
            None
        }
    };
    let (errors, warnings): (Vec<_>, Vec<_>) = reader.diags.into_iter().partition(Diagnostic::is_error);
    match witness {
        Some(witness) if errors.is_empty() => Ok(ParsedWitness { witness, warnings }),
        _ => {
            let mut all = errors;
            all.extend(warnings);
            Err(all)
        }
    }
}

/// All structural violations of `text` against the extended schema, in strict
/// mode. Empty iff the document conforms.
pub fn schema_validate(text: &str) -> Vec<Diagnostic> {
    schema_validate_with(text, ParseOptions::default())
}

pub fn schema_validate_with(text: &str, options: ParseOptions) -> Vec<Diagnostic> {
    match parse_named(text, "witness", options) {
        Ok(parsed) => parsed.warnings,
        Err(diags) => diags,
    }
}

// Scan errors carry their position in the message until placed.
fn diag_line(d: &Diagnostic) -> u32 {
    d.position.as_ref().map_or(1, |p| p.line)
}

fn diag_col(d: &Diagnostic) -> u32 {
    d.position.as_ref().map_or(1, |p| p.column)
}

// ---------------------------------------------------------------------------
// Marked YAML tree
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Node {
    value: NodeValue,
    line: u32,
    column: u32,
}

#[derive(Debug, Clone)]
enum NodeValue {
    Scalar { text: String, plain: bool },
    Seq(Vec<Node>),
    Map(Vec<(Node, Node)>),
}

impl Node {
    fn is_null(&self) -> bool {
        matches!(&self.value, NodeValue::Scalar { text, plain: true }
            if matches!(text.as_str(), "" | "~" | "null" | "Null" | "NULL"))
    }

    fn describe(&self) -> &'static str {
        match &self.value {
            _ if self.is_null() => "null",
            NodeValue::Scalar { .. } => "scalar",
            NodeValue::Seq(_) => "sequence",
            NodeValue::Map(_) => "mapping",
        }
    }
}

enum Frame {
    Seq(Node, Vec<Node>, usize),
    Map(Node, Vec<(Node, Node)>, Option<Node>, usize),
}

#[derive(Default)]
struct TreeBuilder {
    stack: Vec<Frame>,
    root: Option<Node>,
    anchors: HashMap<usize, Node>,
    documents: usize,
}

impl TreeBuilder {
    fn push_node(&mut self, node: Node, anchor: usize) {
        if anchor > 0 {
            self.anchors.insert(anchor, node.clone());
        }
        match self.stack.last_mut() {
            Some(Frame::Seq(_, items, _)) => items.push(node),
            Some(Frame::Map(head, pairs, pending, _)) => match pending.take() {
                None => {
                    if pairs.is_empty() && head.line == 0 {
                        head.line = node.line;
                        head.column = node.column;
                    }
                    *pending = Some(node);
                }
                Some(key) => pairs.push((key, node)),
            },
            None => {
                if self.root.is_none() {
                    self.root = Some(node);
                }
            }
        }
    }
}

fn marker_pos(mark: &Marker) -> (u32, u32) {
    (mark.line() as u32, mark.col() as u32 + 1)
}

impl MarkedEventReceiver for TreeBuilder {
    fn on_event(&mut self, ev: Event, mark: Marker) {
        let (line, column) = marker_pos(&mark);
        match ev {
            Event::DocumentStart => self.documents += 1,
            Event::Scalar(text, style, anchor, _) => {
                let node = Node {
                    value: NodeValue::Scalar {
                        text,
                        plain: style == TScalarStyle::Plain,
                    },
                    line,
                    column,
                };
                self.push_node(node, anchor);
            }
            Event::Alias(id) => {
                let node = self.anchors.get(&id).cloned().unwrap_or(Node {
                    value: NodeValue::Scalar {
                        text: String::new(),
                        plain: true,
                    },
                    line,
                    column,
                });
                self.push_node(node, 0);
            }
            Event::SequenceStart(anchor, _) => {
                let head = Node {
                    value: NodeValue::Seq(Vec::new()),
                    line,
                    column,
                };
                self.stack.push(Frame::Seq(head, Vec::new(), anchor));
            }
            Event::MappingStart(anchor, _) => {
                // Mapping markers point past the first key; use the key's position instead.
                let head = Node {
                    value: NodeValue::Map(Vec::new()),
                    line: 0,
                    column: 0,
                };
                self.stack.push(Frame::Map(head, Vec::new(), None, anchor));
            }
            Event::SequenceEnd => {
                if let Some(Frame::Seq(mut head, items, anchor)) = self.stack.pop() {
                    head.value = NodeValue::Seq(items);
                    self.push_node(head, anchor);
                }
            }
            Event::MappingEnd => {
                if let Some(Frame::Map(mut head, pairs, _, anchor)) = self.stack.pop() {
                    if head.line == 0 {
                        head.line = line;
                        head.column = column;
                    }
                    head.value = NodeValue::Map(pairs);
                    self.push_node(head, anchor);
                }
            }
            _ => {}
        }
    }
}

fn load_yaml(text: &str) -> Result<Node, Diagnostic> {
    let mut builder = TreeBuilder::default();
    let mut parser = Parser::new_from_str(text);
    if let Err(e) = parser.load(&mut builder, true) {
        let (line, column) = marker_pos(e.marker());
        return Err(Diagnostic::error("schema.yaml", format!("malformed YAML: {}", e.info())).at("", line, column));
    }
    if builder.documents > 1 {
        return Err(Diagnostic::error("schema.yaml", "expected a single YAML document"));
    }
    builder
        .root
        .ok_or_else(|| Diagnostic::error("schema.yaml", "empty document").at("", 1, 1))
}

// ---------------------------------------------------------------------------
// Schema walk
// ---------------------------------------------------------------------------

struct Reader<'a> {
    source: &'a str,
    options: ParseOptions,
    diags: Vec<Diagnostic>,
}

struct MapView<'n> {
    node: &'n Node,
    pairs: Vec<(&'n str, &'n Node, &'n Node)>,
    path: String,
}

impl<'n> MapView<'n> {
    fn get(&self, key: &str) -> Option<&'n Node> {
        self.pairs.iter().find(|(k, _, _)| *k == key).map(|(_, _, v)| *v)
    }

    fn child_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_owned()
        } else {
            format!("{}.{}", self.path, key)
        }
    }
}

impl<'a> Reader<'a> {
    fn error(&mut self, code: &'static str, node: &Node, path: &str, message: String) {
        self.diags.push(
            Diagnostic::error(code, message)
                .with_path(path)
                .at(self.source, node.line, node.column),
        );
    }

    fn unknown(&mut self, code: &'static str, node: &Node, path: &str, message: String) {
        let diag = match self.options.mode {
            ParseMode::Strict => Diagnostic::error(code, message),
            ParseMode::Lenient => Diagnostic::warning(code, message),
        };
        self.diags
            .push(diag.with_path(path).at(self.source, node.line, node.column));
    }

    fn mapping<'n>(&mut self, node: &'n Node, path: &str, known: &[&str]) -> Option<MapView<'n>> {
        let NodeValue::Map(pairs) = &node.value else {
            self.error(
                "schema.type",
                node,
                path,
                format!("expected mapping, found {}", node.describe()),
            );
            return None;
        };
        let mut view = MapView {
            node,
            pairs: Vec::new(),
            path: path.to_owned(),
        };
        for (key, value) in pairs {
            let NodeValue::Scalar { text, .. } = &key.value else {
                self.error("schema.type", key, path, "mapping keys must be scalars".into());
                continue;
            };
            if view.pairs.iter().any(|(k, _, _)| k == text) {
                self.error(
                    "schema.duplicate_key",
                    key,
                    &view.child_path(text),
                    format!("duplicate key: {text}"),
                );
                continue;
            }
            if !known.contains(&text.as_str()) {
                let child = view.child_path(text);
                self.unknown("schema.unknown_key", key, &child, format!("unknown key: {text}"));
                continue;
            }
            view.pairs.push((text.as_str(), key, value));
        }
        Some(view)
    }

    fn required<'n>(&mut self, view: &MapView<'n>, key: &str) -> Option<&'n Node> {
        let found = view.get(key);
        if found.is_none() {
            self.error(
                "schema.missing_key",
                view.node,
                &view.path,
                format!("missing key: {key}"),
            );
        }
        found
    }

    fn scalar(&mut self, node: &Node, path: &str) -> Option<String> {
        match &node.value {
            NodeValue::Scalar { text, .. } if !node.is_null() => Some(text.clone()),
            _ => {
                self.error(
                    "schema.type",
                    node,
                    path,
                    format!("expected scalar, found {}", node.describe()),
                );
                None
            }
        }
    }

    fn required_scalar(&mut self, view: &MapView<'_>, key: &str) -> Option<String> {
        let node = self.required(view, key)?;
        self.scalar(node, &view.child_path(key))
    }

    fn optional_scalar(&mut self, view: &MapView<'_>, key: &str) -> Result<Option<String>, ()> {
        match view.get(key) {
            None => Ok(None),
            Some(node) => self.scalar(node, &view.child_path(key)).map(Some).ok_or(()),
        }
    }

    fn integer(&mut self, node: &Node, path: &str, min: u64) -> Option<u32> {
        let text = self.scalar(node, path)?;
        match text.trim().parse::<u64>() {
            Ok(v) if v >= min && v <= u64::from(u32::MAX) => Some(v as u32),
            Ok(v) => {
                self.error(
                    "schema.range",
                    node,
                    path,
                    format!("value {v} out of range (minimum {min})"),
                );
                None
            }
            Err(_) => {
                self.error("schema.type", node, path, format!("expected integer, found `{text}`"));
                None
            }
        }
    }

    fn witness(&mut self, root: &Node) -> Option<WitnessSet> {
        let NodeValue::Seq(items) = &root.value else {
            self.error(
                "schema.type",
                root,
                "",
                format!("expected a sequence of witness entries, found {}", root.describe()),
            );
            return None;
        };
        let mut sets = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("[{i}]");
            let Some(view) = self.mapping(item, &path, &["entry_type", "metadata", "content"]) else {
                continue;
            };
            let Some(entry_type) = self.required_scalar(&view, "entry_type") else {
                continue;
            };
            if entry_type != "invariant_set" {
                let node = view.get("entry_type").unwrap_or(item);
                self.error(
                    "schema.enum",
                    node,
                    &view.child_path("entry_type"),
                    format!("invalid value `{entry_type}` for key `entry_type`; allowed values: invariant_set"),
                );
                continue;
            }
            sets.push((item, self.invariant_set(&view)));
        }
        if sets.len() != 1 {
            self.error(
                "schema.structure",
                root,
                "",
                format!(
                    "a correctness witness must contain exactly one invariant_set entry, found {}",
                    sets.len()
                ),
            );
            return None;
        }
        sets.pop().and_then(|(_, set)| set)
    }

    fn invariant_set(&mut self, view: &MapView<'_>) -> Option<WitnessSet> {
        let metadata = self
            .required(view, "metadata")
            .and_then(|node| self.metadata(node, &view.child_path("metadata")));
        let content_path = view.child_path("content");
        let content = self.required(view, "content");
        let mut entries = Vec::new();
        let mut ok = true;
        match content {
            None => ok = false,
            Some(node) if node.is_null() => {}
            Some(node) => match &node.value {
                NodeValue::Seq(items) => {
                    for (i, item) in items.iter().enumerate() {
                        match self.content_item(item, &format!("{content_path}[{i}]")) {
                            Ok(Some(entry)) => entries.push(entry),
                            Ok(None) => {}
                            Err(()) => ok = false,
                        }
                    }
                }
                _ => {
                    self.error(
                        "schema.type",
                        node,
                        &content_path,
                        format!("expected sequence, found {}", node.describe()),
                    );
                    ok = false;
                }
            },
        }
        let metadata = metadata?;
        if metadata.format_version == FORMAT_VERSION_2_0 {
            for (i, entry) in entries.iter().enumerate() {
                let path = format!("{content_path}[{i}].invariant");
                let node = content_node(view, i).unwrap_or(view.node);
                if entry.kind() == EntryKind::FunctionContract {
                    self.error(
                        "schema.version",
                        node,
                        &path,
                        "function_contract entries require format_version 2.1".into(),
                    );
                    ok = false;
                } else if entry.format == ExpressionFormat::AcslExpression {
                    self.error(
                        "schema.version",
                        node,
                        &path,
                        "acsl_expression format requires format_version 2.1".into(),
                    );
                    ok = false;
                }
            }
        }
        ok.then_some(WitnessSet { metadata, entries })
    }

    fn metadata(&mut self, node: &Node, path: &str) -> Option<Metadata> {
        let view = self.mapping(
            node,
            path,
            &["format_version", "uuid", "creation_time", "producer", "task"],
        )?;
        let version = self.required_scalar(&view, "format_version");
        if let Some(v) = &version {
            if v != FORMAT_VERSION_2_0 && v != FORMAT_VERSION_2_1 {
                let node = view.get("format_version").unwrap_or(node);
                self.error(
                    "schema.enum",
                    node,
                    &view.child_path("format_version"),
                    format!("invalid value `{v}` for key `format_version`; allowed values: 2.0, 2.1"),
                );
            }
        }
        let uuid = self.optional_scalar(&view, "uuid");
        let creation_time = self.optional_scalar(&view, "creation_time");
        let producer = self
            .required(&view, "producer")
            .and_then(|n| self.producer(n, &view.child_path("producer")));
        let task = match view.get("task") {
            None => Ok(None),
            Some(n) => self.task(n, &view.child_path("task")).map(Some).ok_or(()),
        };
        let format_version = version.filter(|v| v == FORMAT_VERSION_2_0 || v == FORMAT_VERSION_2_1)?;
        Some(Metadata {
            format_version,
            uuid: uuid.ok()?,
            creation_time: creation_time.ok()?,
            producer: producer?,
            task: task.ok()?,
        })
    }

    fn producer(&mut self, node: &Node, path: &str) -> Option<Producer> {
        let view = self.mapping(
            node,
            path,
            &["name", "version", "configuration", "description", "command_line"],
        )?;
        let name = self.required_scalar(&view, "name");
        let version = self.required_scalar(&view, "version");
        let configuration = self.optional_scalar(&view, "configuration");
        let description = self.optional_scalar(&view, "description");
        let command_line = self.optional_scalar(&view, "command_line");
        Some(Producer {
            name: name?,
            version: version?,
            configuration: configuration.ok()?,
            description: description.ok()?,
            command_line: command_line.ok()?,
        })
    }

    fn task(&mut self, node: &Node, path: &str) -> Option<Task> {
        let view = self.mapping(
            node,
            path,
            &[
                "input_files",
                "input_file_hashes",
                "specification",
                "data_model",
                "language",
            ],
        )?;
        let mut ok = true;
        let mut input_files = Vec::new();
        if let Some(n) = view.get("input_files") {
            let p = view.child_path("input_files");
            match &n.value {
                NodeValue::Seq(items) => {
                    for (i, item) in items.iter().enumerate() {
                        match self.scalar(item, &format!("{p}[{i}]")) {
                            Some(s) => input_files.push(s),
                            None => ok = false,
                        }
                    }
                }
                _ => {
                    self.error(
                        "schema.type",
                        n,
                        &p,
                        format!("expected sequence, found {}", n.describe()),
                    );
                    ok = false;
                }
            }
        }
        let mut input_file_hashes = Vec::new();
        if let Some(n) = view.get("input_file_hashes") {
            let p = view.child_path("input_file_hashes");
            match &n.value {
                NodeValue::Map(pairs) => {
                    for (k, v) in pairs {
                        let key = self.scalar(k, &p);
                        let value = self.scalar(v, &p);
                        match (key, value) {
                            (Some(k), Some(v)) => input_file_hashes.push((k, v)),
                            _ => ok = false,
                        }
                    }
                }
                _ => {
                    self.error(
                        "schema.type",
                        n,
                        &p,
                        format!("expected mapping, found {}", n.describe()),
                    );
                    ok = false;
                }
            }
        }
        let specification = self.optional_scalar(&view, "specification");
        let data_model = self.optional_scalar(&view, "data_model");
        let language = self.optional_scalar(&view, "language");
        let task = Task {
            input_files,
            input_file_hashes,
            specification: specification.ok()?,
            data_model: data_model.ok()?,
            language: language.ok()?,
        };
        ok.then_some(task)
    }

    /// `Ok(None)` means the item was skipped in lenient mode.
    fn content_item(&mut self, node: &Node, path: &str) -> Result<Option<Entry>, ()> {
        let view = self.mapping(node, path, &["invariant"]).ok_or(())?;
        let inv = self.required(&view, "invariant").ok_or(())?;
        let inv_path = view.child_path("invariant");
        let NodeValue::Map(_) = &inv.value else {
            self.error(
                "schema.type",
                inv,
                &inv_path,
                format!("expected mapping, found {}", inv.describe()),
            );
            return Err(());
        };
        // Look at the type first so the allowed key set can depend on it.
        let kind_text = match &inv.value {
            NodeValue::Map(pairs) => pairs.iter().find_map(|(k, v)| match (&k.value, &v.value) {
                (NodeValue::Scalar { text: key, .. }, NodeValue::Scalar { text, .. }) if key == "type" => {
                    Some((text.clone(), v))
                }
                _ => None,
            }),
            _ => None,
        };
        let kind = match &kind_text {
            Some((text, type_node)) => match EntryKind::parse(text) {
                Some(kind) => Some(kind),
                None => {
                    let message = format!(
                        "unknown entry type `{text}`; allowed values: function_contract, loop_invariant, location_invariant"
                    );
                    self.unknown("schema.unknown_type", type_node, &format!("{inv_path}.type"), message);
                    return match self.options.mode {
                        ParseMode::Strict => Err(()),
                        ParseMode::Lenient => Ok(None),
                    };
                }
            },
            None => None,
        };
        let known: &[&str] = match kind {
            Some(EntryKind::FunctionContract) => &["type", "location", "format", "requires", "ensures"],
            Some(_) => &["type", "location", "format", "value"],
            None => &["type", "location", "format", "value", "requires", "ensures"],
        };
        let view = self.mapping(inv, &inv_path, known).ok_or(())?;
        let type_node = self.required(&view, "type");
        if let Some(n) = type_node {
            self.scalar(n, &view.child_path("type"));
        }
        let location = self
            .required(&view, "location")
            .and_then(|n| self.location(n, &view.child_path("location")));
        let format = self.required(&view, "format").and_then(|n| {
            let p = view.child_path("format");
            let text = self.scalar(n, &p)?;
            let parsed = ExpressionFormat::parse(&text);
            if parsed.is_none() {
                self.error(
                    "schema.enum",
                    n,
                    &p,
                    format!("invalid value `{text}` for key `format`; allowed values: c_expression, acsl_expression"),
                );
            }
            parsed
        });
        let body = match kind {
            Some(EntryKind::FunctionContract) => {
                let requires = self.optional_scalar(&view, "requires");
                let ensures = self.optional_scalar(&view, "ensures");
                match (requires, ensures) {
                    (Ok(requires), Ok(ensures)) => Some(EntryBody::FunctionContract { requires, ensures }),
                    _ => None,
                }
            }
            Some(kind) => self.required_scalar(&view, "value").map(|value| match kind {
                EntryKind::LoopInvariant => EntryBody::LoopInvariant { value },
                _ => EntryBody::LocationInvariant { value },
            }),
            None => None,
        };
        match (location, format, body) {
            (Some(location), Some(format), Some(body)) => Ok(Some(Entry { location, format, body })),
            _ => Err(()),
        }
    }

    fn location(&mut self, node: &Node, path: &str) -> Option<Location> {
        let view = self.mapping(node, path, &["file_name", "line", "column", "function"])?;
        let file_name = self.required_scalar(&view, "file_name");
        let line = self
            .required(&view, "line")
            .and_then(|n| self.integer(n, &view.child_path("line"), 1));
        let min_col = self.options.column_base.minimum();
        let column = match view.get("column") {
            None => Ok(None),
            Some(n) => self.integer(n, &view.child_path("column"), min_col).map(Some).ok_or(()),
        };
        let function = self.optional_scalar(&view, "function");
        Some(Location {
            file_name: file_name?,
            line: line?,
            column: column.ok()?,
            function: function.ok()?,
        })
    }
}

fn content_node<'n>(view: &MapView<'n>, index: usize) -> Option<&'n Node> {
    match &view.get("content")?.value {
        NodeValue::Seq(items) => items.get(index),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

fn s(text: &str) -> Yaml {
    Yaml::String(text.to_owned())
}

fn insert(hash: &mut Hash, key: &str, value: Yaml) {
    hash.insert(s(key), value);
}

fn insert_opt(hash: &mut Hash, key: &str, value: &Option<String>) {
    if let Some(v) = value {
        insert(hash, key, s(v));
    }
}

fn entry_yaml(entry: &Entry) -> Yaml {
    let mut location = Hash::new();
    insert(&mut location, "file_name", s(&entry.location.file_name));
    insert(&mut location, "line", Yaml::Integer(entry.location.line.into()));
    if let Some(column) = entry.location.column {
        insert(&mut location, "column", Yaml::Integer(column.into()));
    }
    insert_opt(&mut location, "function", &entry.location.function);

    let mut inv = Hash::new();
    insert(&mut inv, "type", s(entry.kind().as_str()));
    insert(&mut inv, "location", Yaml::Hash(location));
    match &entry.body {
        EntryBody::FunctionContract { requires, ensures } => {
            insert_opt(&mut inv, "requires", requires);
            insert_opt(&mut inv, "ensures", ensures);
        }
        EntryBody::LoopInvariant { value } | EntryBody::LocationInvariant { value } => {
            insert(&mut inv, "value", s(value));
        }
    }
    insert(&mut inv, "format", s(entry.format.as_str()));

    let mut item = Hash::new();
    insert(&mut item, "invariant", Yaml::Hash(inv));
    Yaml::Hash(item)
}

fn metadata_yaml(meta: &Metadata) -> Yaml {
    let mut hash = Hash::new();
    insert(&mut hash, "format_version", s(&meta.format_version));
    insert_opt(&mut hash, "uuid", &meta.uuid);
    insert_opt(&mut hash, "creation_time", &meta.creation_time);
    let p = &meta.producer;
    let mut producer = Hash::new();
    insert(&mut producer, "name", s(&p.name));
    insert(&mut producer, "version", s(&p.version));
    insert_opt(&mut producer, "configuration", &p.configuration);
    insert_opt(&mut producer, "description", &p.description);
    insert_opt(&mut producer, "command_line", &p.command_line);
    insert(&mut hash, "producer", Yaml::Hash(producer));
    if let Some(task) = &meta.task {
        let mut t = Hash::new();
        if !task.input_files.is_empty() {
            insert(
                &mut t,
                "input_files",
                Yaml::Array(task.input_files.iter().map(|f| s(f)).collect()),
            );
        }
        if !task.input_file_hashes.is_empty() {
            let mut hashes = Hash::new();
            for (file, digest) in &task.input_file_hashes {
                hashes.insert(s(file), s(digest));
            }
            insert(&mut t, "input_file_hashes", Yaml::Hash(hashes));
        }
        insert_opt(&mut t, "specification", &task.specification);
        insert_opt(&mut t, "data_model", &task.data_model);
        insert_opt(&mut t, "language", &task.language);
        insert(&mut hash, "task", Yaml::Hash(t));
    }
    Yaml::Hash(hash)
}

/// Emits `w` as a YAML document. Optional fields that are absent in the model
/// are not written, so an omitted `requires` stays omitted.
pub fn serialize_witness(w: &WitnessSet) -> String {
    let mut set = Hash::new();
    insert(&mut set, "entry_type", s("invariant_set"));
    insert(&mut set, "metadata", metadata_yaml(&w.metadata));
    insert(
        &mut set,
        "content",
        Yaml::Array(w.entries.iter().map(entry_yaml).collect()),
    );
    let doc = Yaml::Array(vec![Yaml::Hash(set)]);
    let mut out = String::new();
    YamlEmitter::new(&mut out)
        .dump(&doc)
        .expect("writing YAML into a String cannot fail");
    out.push('\n');
    out
}
