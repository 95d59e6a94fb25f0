//! Network data model and CSV instance files.
//!
//! Four files describe an instance (one header row each, `#` lines are
//! comments):
//!
//! ```text
//! nodes.csv  id,x,y
//! links.csv  id,from,to,length,vf,w,kjam,capacity   (capacity may be empty)
//! od.csv     od_id,origin,dest,demand,target_time
//! paths.csv  path_id,od_id,link_1,link_2,...
//! ```
//!
//! A comment of the form `# units: time=min, distance=m` declares the units
//! of the file it appears in (default hours and kilometres). Everything is
//! converted to hours and kilometres on load.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use crate::error::{Error, Result};
use crate::hilbert::{OdPartition, TripTable};
use crate::scalar::Scalar;

pub const NODES_FILE: &str = "nodes.csv";
pub const LINKS_FILE: &str = "links.csv";
pub const OD_FILE: &str = "od.csv";
pub const PATHS_FILE: &str = "paths.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct Node<T> {
    pub id: String,
    pub x: T,
    pub y: T,
}

/// A road segment with a triangular fundamental diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct Link<T> {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub length: T,
    pub free_speed: T,
    pub wave_speed: T,
    pub jam_density: T,
    pub capacity: T,
    pub critical_density: T,
}

impl<T: Scalar> Link<T> {
    /// Builds a link from `(L, v, w, rho_jam)`, deriving `C` and `rho_c`.
    /// A supplied capacity must agree with the derived one to 1e-9 relative.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        tail: usize,
        head: usize,
        length: T,
        free_speed: T,
        wave_speed: T,
        jam_density: T,
        capacity: Option<T>,
    ) -> Result<Self> {
        let id = id.into();
        for (name, v) in [
            ("length", length),
            ("free-flow speed", free_speed),
            ("backward wave speed", wave_speed),
            ("jam density", jam_density),
        ] {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::Validation(format!("link {id}: {name} must be positive, got {v}")));
            }
        }
        let derived = free_speed * wave_speed * jam_density / (free_speed + wave_speed);
        if let Some(c) = capacity {
            let rel = ((c - derived) / derived).abs();
            if !c.is_finite() || rel > T::lit(1e-9).max(T::epsilon() * T::lit(16.0)) {
                return Err(Error::Validation(format!(
                    "link {id}: capacity {c} inconsistent with triangular diagram (v*w*kjam/(v+w) = {derived})"
                )));
            }
        }
        Ok(Link {
            id,
            tail,
            head,
            length,
            free_speed,
            wave_speed,
            jam_density,
            capacity: derived,
            critical_density: derived / free_speed,
        })
    }

    pub fn free_flow_time(&self) -> T {
        self.length / self.free_speed
    }

    pub fn backward_time(&self) -> T {
        self.length / self.wave_speed
    }

    pub fn storage(&self) -> T {
        self.jam_density * self.length
    }

    /// Largest admissible step: `L / max(v, w)`.
    pub fn cfl_limit(&self) -> T {
        self.length / self.free_speed.max(self.wave_speed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub id: String,
    pub od: usize,
    pub links: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdPair {
    pub id: String,
    pub origin: usize,
    pub destination: usize,
}

/// Role of a node with respect to the O-D pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NodeRole {
    pub origin: bool,
    pub destination: bool,
}

impl NodeRole {
    pub fn is_ordinary(&self) -> bool {
        !self.origin && !self.destination
    }

    pub fn label(&self) -> &'static str {
        match (self.origin, self.destination) {
            (false, false) => "ordinary",
            (true, false) => "origin",
            (false, true) => "destination",
            (true, true) => "origin+destination",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JunctionShape {
    Isolated,
    Source,
    Sink,
    /// one in, one out
    Pass,
    Merge,
    Diverge,
    General,
}

impl JunctionShape {
    pub fn from_degrees(m: usize, n: usize) -> Self {
        match (m, n) {
            (0, 0) => JunctionShape::Isolated,
            (0, _) => JunctionShape::Source,
            (_, 0) => JunctionShape::Sink,
            (1, 1) => JunctionShape::Pass,
            (_, 1) => JunctionShape::Merge,
            (1, _) => JunctionShape::Diverge,
            _ => JunctionShape::General,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Junction {
    pub node: usize,
    pub incoming: Vec<usize>,
    pub outgoing: Vec<usize>,
    pub role: NodeRole,
    pub shape: JunctionShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    pub nodes: Vec<Node<T>>,
    pub links: Vec<Link<T>>,
    pub ods: Vec<OdPair>,
    pub trips: TripTable<T>,
    pub paths: Vec<Path>,
    pub partition: OdPartition,
    pub junctions: Vec<Junction>,
}

impl<T: Scalar> Network<T> {
    /// Assembles and validates a network; junctions are classified on the way.
    pub fn new(
        nodes: Vec<Node<T>>,
        links: Vec<Link<T>>,
        ods: Vec<OdPair>,
        trips: TripTable<T>,
        paths: Vec<Path>,
    ) -> Result<Self> {
        if ods.is_empty() {
            return Err(Error::Validation("no demand: O-D table is empty".into()));
        }
        if trips.len() != ods.len() {
            return Err(Error::Dimension(format!(
                "{} O-D pairs but {} trip table entries",
                ods.len(),
                trips.len()
            )));
        }
        for l in &links {
            if l.tail >= nodes.len() || l.head >= nodes.len() {
                return Err(Error::Validation(format!("link {} references a missing node", l.id)));
            }
        }
        for p in &paths {
            validate_path(p, &links, &ods)?;
        }
        let partition = OdPartition::new(ods.len(), paths.iter().map(|p| p.od).collect())
            .map_err(|e| match e {
                Error::Config(msg) => Error::Validation(msg),
                other => other,
            })?;
        let net = Network {
            nodes,
            links,
            ods,
            trips,
            paths,
            partition,
            junctions: Vec::new(),
        };
        net.classify_junctions()
    }

    /// Tags every node with its O-D role and junction shape.
    pub fn classify_junctions(mut self) -> Result<Self> {
        let mut junctions: Vec<Junction> = (0..self.nodes.len())
            .map(|node| Junction {
                node,
                incoming: Vec::new(),
                outgoing: Vec::new(),
                role: NodeRole::default(),
                shape: JunctionShape::Isolated,
            })
            .collect();
        for (i, l) in self.links.iter().enumerate() {
            junctions[l.tail].outgoing.push(i);
            junctions[l.head].incoming.push(i);
        }
        for od in &self.ods {
            if od.origin == od.destination {
                return Err(Error::Validation(format!(
                    "node {} is both origin and destination of O-D pair {}",
                    self.nodes[od.origin].id, od.id
                )));
            }
            junctions[od.origin].role.origin = true;
            junctions[od.destination].role.destination = true;
        }
        for j in &mut junctions {
            j.shape = JunctionShape::from_degrees(j.incoming.len(), j.outgoing.len());
        }
        self.junctions = junctions;
        Ok(self)
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn free_flow_time(&self, path: usize) -> T {
        self.paths[path]
            .links
            .iter()
            .map(|&i| self.links[i].free_flow_time())
            .sum()
    }

    pub fn max_free_flow_time(&self) -> T {
        (0..self.paths.len())
            .map(|p| self.free_flow_time(p))
            .fold(T::zero(), T::max)
    }

    pub fn max_capacity(&self) -> T {
        self.links.iter().map(|l| l.capacity).fold(T::zero(), T::max)
    }

    /// Checks `dt <= L_i / max(v_i, w_i)` for every link.
    pub fn check_cfl(&self, dt: T) -> Result<()> {
        for l in &self.links {
            let limit = l.cfl_limit();
            if dt > limit * (T::one() + T::lit(1e-12)) {
                return Err(Error::Cfl {
                    link: l.id.clone(),
                    dt: dt.as_f64(),
                    limit: limit.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Links of every path reachable from the path's origin by graph search.
    pub fn unreachable_path_links(&self) -> Vec<(usize, usize)> {
        let mut adjacency = vec![Vec::new(); self.nodes.len()];
        for l in &self.links {
            adjacency[l.tail].push(l.head);
        }
        let mut reach_cache: HashMap<usize, Vec<bool>> = HashMap::new();
        let mut bad = Vec::new();
        for (p, path) in self.paths.iter().enumerate() {
            let origin = self.ods[path.od].origin;
            let seen = reach_cache.entry(origin).or_insert_with(|| {
                let mut seen = vec![false; adjacency.len()];
                let mut queue = VecDeque::from([origin]);
                seen[origin] = true;
                while let Some(u) = queue.pop_front() {
                    for &v in &adjacency[u] {
                        if !seen[v] {
                            seen[v] = true;
                            queue.push_back(v);
                        }
                    }
                }
                seen
            });
            for &i in &path.links {
                if !seen[self.links[i].tail] {
                    bad.push((p, i));
                }
            }
        }
        bad
    }

    /// Writes the instance in canonical units (hours, kilometres).
    pub fn write_dir(&self, dir: impl AsRef<FsPath>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
        let units = "# units: time=h, distance=km\n";

        let mut s = String::from("id,x,y\n");
        for n in &self.nodes {
            let _ = writeln!(s, "{},{},{}", n.id, n.x, n.y);
        }
        write_file(&dir.join(NODES_FILE), &s)?;

        let mut s = format!("{units}id,from,to,length,vf,w,kjam,capacity\n");
        for l in &self.links {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                l.id,
                self.nodes[l.tail].id,
                self.nodes[l.head].id,
                l.length,
                l.free_speed,
                l.wave_speed,
                l.jam_density,
                l.capacity
            );
        }
        write_file(&dir.join(LINKS_FILE), &s)?;

        let mut s = format!("{units}od_id,origin,dest,demand,target_time\n");
        for (w, od) in self.ods.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                od.id,
                self.nodes[od.origin].id,
                self.nodes[od.destination].id,
                self.trips.demand(w),
                self.trips.target(w)
            );
        }
        write_file(&dir.join(OD_FILE), &s)?;

        let mut s = String::from("path_id,od_id,links\n");
        for p in &self.paths {
            let _ = write!(s, "{},{}", p.id, self.ods[p.od].id);
            for &i in &p.links {
                let _ = write!(s, ",{}", self.links[i].id);
            }
            s.push('\n');
        }
        write_file(&dir.join(PATHS_FILE), &s)
    }
}

fn write_file(path: &FsPath, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.into(), source })
}

fn validate_path<T: Scalar>(p: &Path, links: &[Link<T>], ods: &[OdPair]) -> Result<()> {
    let od = ods
        .get(p.od)
        .ok_or_else(|| Error::Validation(format!("path {} refers to a missing O-D pair", p.id)))?;
    let (first, last) = match (p.links.first(), p.links.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::Validation(format!("path {} has no links", p.id))),
    };
    if p.links.iter().any(|&i| i >= links.len()) {
        return Err(Error::Validation(format!("path {} references a missing link", p.id)));
    }
    let mut seen = HashSet::new();
    for &i in &p.links {
        if !seen.insert(i) {
            return Err(Error::Validation(format!(
                "path {} repeats link {}",
                p.id, links[i].id
            )));
        }
    }
    for pair in p.links.windows(2) {
        if links[pair[0]].head != links[pair[1]].tail {
            return Err(Error::Validation(format!(
                "path {} is not connected between links {} and {}",
                p.id, links[pair[0]].id, links[pair[1]].id
            )));
        }
    }
    if links[first].tail != od.origin {
        return Err(Error::Validation(format!(
            "path {} does not start at the origin of O-D pair {}",
            p.id, od.id
        )));
    }
    if links[last].head != od.destination {
        return Err(Error::Validation(format!(
            "path {} does not end at the destination of O-D pair {}",
            p.id, od.id
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Units {
    /// hours per time unit
    time: f64,
    /// kilometres per distance unit
    distance: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { time: 1.0, distance: 1.0 }
    }
}

struct CsvFile {
    path: PathBuf,
    units: Units,
    /// (line number, fields)
    rows: Vec<(usize, Vec<String>)>,
}

fn read_csv(path: &FsPath) -> Result<CsvFile> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let mut units = Units::default();
    for (n, line) in text.lines().enumerate() {
        let body = match line.trim_start().strip_prefix('#') {
            Some(b) => b.trim(),
            None => continue,
        };
        if let Some(spec) = body.strip_prefix("units:") {
            units = parse_units(spec).map_err(|msg| Error::parse(path, n + 1, msg))?;
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, record.iter().map(str::to_owned).collect()));
    }
    Ok(CsvFile { path: path.into(), units, rows })
}

fn parse_units(spec: &str) -> std::result::Result<Units, String> {
    let mut units = Units::default();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format!("malformed unit declaration `{item}`"))?;
        match (key.trim(), value.trim()) {
            ("time", "h") => units.time = 1.0,
            ("time", "min") => units.time = 1.0 / 60.0,
            ("time", "s") => units.time = 1.0 / 3600.0,
            ("distance", "km") => units.distance = 1.0,
            ("distance", "m") => units.distance = 1e-3,
            ("distance", "mi") => units.distance = 1.609_344,
            (k, v) => return Err(format!("unknown unit `{k}={v}`")),
        }
    }
    Ok(units)
}

impl CsvFile {
    fn field<'a>(&self, line: usize, row: &'a [String], idx: usize, name: &str) -> Result<&'a str> {
        row.get(idx)
            .map(String::as_str)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::parse(&self.path, line, format!("missing field `{name}`")))
    }

    fn number<T: Scalar>(&self, line: usize, row: &[String], idx: usize, name: &str) -> Result<T> {
        let raw = self.field(line, row, idx, name)?;
        let v: f64 = raw
            .parse()
            .map_err(|_| Error::parse(&self.path, line, format!("`{name}` is not a number: `{raw}`")))?;
        if !v.is_finite() {
            return Err(Error::parse(&self.path, line, format!("`{name}` is not finite")));
        }
        Ok(T::lit(v))
    }

    fn invalid(&self, line: usize, msg: impl std::fmt::Display) -> Error {
        Error::Validation(format!("{}:{}: {}", self.path.display(), line, msg))
    }
}

fn index_of(ids: &HashMap<String, usize>, key: &str) -> Option<usize> {
    ids.get(key).copied()
}

/// Loads and validates an instance from its four files.
pub fn load_network<T: Scalar>(
    node_file: impl AsRef<FsPath>,
    link_file: impl AsRef<FsPath>,
    od_file: impl AsRef<FsPath>,
    path_file: impl AsRef<FsPath>,
) -> Result<Network<T>> {
    let nodes_csv = read_csv(node_file.as_ref())?;
    let mut nodes = Vec::new();
    let mut node_ids = HashMap::new();
    for (line, row) in &nodes_csv.rows {
        let id = nodes_csv.field(*line, row, 0, "id")?.to_owned();
        let x = nodes_csv.number(*line, row, 1, "x")?;
        let y = nodes_csv.number(*line, row, 2, "y")?;
        if node_ids.insert(id.clone(), nodes.len()).is_some() {
            return Err(nodes_csv.invalid(*line, format!("duplicate node id {id}")));
        }
        nodes.push(Node { id, x, y });
    }

    let links_csv = read_csv(link_file.as_ref())?;
    let u = links_csv.units;
    let speed = T::lit(u.distance / u.time);
    let mut links = Vec::new();
    let mut link_ids = HashMap::new();
    for (line, row) in &links_csv.rows {
        let line = *line;
        let id = links_csv.field(line, row, 0, "id")?.to_owned();
        let from = links_csv.field(line, row, 1, "from")?;
        let to = links_csv.field(line, row, 2, "to")?;
        let tail = index_of(&node_ids, from)
            .ok_or_else(|| links_csv.invalid(line, format!("link {id}: unknown node {from}")))?;
        let head = index_of(&node_ids, to)
            .ok_or_else(|| links_csv.invalid(line, format!("link {id}: unknown node {to}")))?;
        let length = links_csv.number::<T>(line, row, 3, "length")? * T::lit(u.distance);
        let vf = links_csv.number::<T>(line, row, 4, "vf")? * speed;
        let w = links_csv.number::<T>(line, row, 5, "w")? * speed;
        let kjam = links_csv.number::<T>(line, row, 6, "kjam")? / T::lit(u.distance);
        let capacity = match row.get(7).map(String::as_str) {
            None | Some("") => None,
            Some(_) => Some(links_csv.number::<T>(line, row, 7, "capacity")? / T::lit(u.time)),
        };
        let link = Link::new(id.clone(), tail, head, length, vf, w, kjam, capacity)
            .map_err(|e| links_csv.invalid(line, e))?;
        if link_ids.insert(id.clone(), links.len()).is_some() {
            return Err(links_csv.invalid(line, format!("duplicate link id {id}")));
        }
        links.push(link);
    }

    let od_csv = read_csv(od_file.as_ref())?;
    if od_csv.rows.is_empty() {
        return Err(Error::Validation(format!("{}: no demand (empty O-D table)", od_csv.path.display())));
    }
    let mut ods = Vec::new();
    let mut od_ids = HashMap::new();
    let mut demands = Vec::new();
    let mut targets = Vec::new();
    for (line, row) in &od_csv.rows {
        let line = *line;
        let id = od_csv.field(line, row, 0, "od_id")?.to_owned();
        let o = od_csv.field(line, row, 1, "origin")?;
        let d = od_csv.field(line, row, 2, "dest")?;
        let origin = index_of(&node_ids, o)
            .ok_or_else(|| od_csv.invalid(line, format!("O-D {id}: unknown origin {o}")))?;
        let destination = index_of(&node_ids, d)
            .ok_or_else(|| od_csv.invalid(line, format!("O-D {id}: unknown destination {d}")))?;
        if origin == destination {
            return Err(od_csv.invalid(
                line,
                format!("node {o} is both origin and destination of O-D pair {id}"),
            ));
        }
        let q: T = od_csv.number(line, row, 3, "demand")?;
        if q <= T::zero() {
            return Err(od_csv.invalid(line, format!("O-D {id}: demand must be positive")));
        }
        let tau = od_csv.number::<T>(line, row, 4, "target_time")? * T::lit(od_csv.units.time);
        if od_ids.insert(id.clone(), ods.len()).is_some() {
            return Err(od_csv.invalid(line, format!("duplicate O-D id {id}")));
        }
        ods.push(OdPair { id, origin, destination });
        demands.push(q);
        targets.push(tau);
    }
    let trips = TripTable::new(demands, targets)?;

    let paths_csv = read_csv(path_file.as_ref())?;
    let mut paths = Vec::new();
    let mut path_ids = HashSet::new();
    for (line, row) in &paths_csv.rows {
        let line = *line;
        let id = paths_csv.field(line, row, 0, "path_id")?.to_owned();
        let od_key = paths_csv.field(line, row, 1, "od_id")?;
        let od = index_of(&od_ids, od_key)
            .ok_or_else(|| paths_csv.invalid(line, format!("path {id}: unknown O-D pair {od_key}")))?;
        let mut seq = Vec::new();
        for key in row.iter().skip(2).filter(|s| !s.is_empty()) {
            let i = index_of(&link_ids, key)
                .ok_or_else(|| paths_csv.invalid(line, format!("path {id}: unknown link {key}")))?;
            seq.push(i);
        }
        if !path_ids.insert(id.clone()) {
            return Err(paths_csv.invalid(line, format!("duplicate path id {id}")));
        }
        let path = Path { id, od, links: seq };
        validate_path(&path, &links, &ods).map_err(|e| paths_csv.invalid(line, strip_prefix(e)))?;
        paths.push(path);
    }

    Network::new(nodes, links, ods, trips, paths)
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Validation(m) => m,
        other => other.to_string(),
    }
}

/// Loads `nodes.csv`, `links.csv`, `od.csv` and `paths.csv` from `dir`.
pub fn load_dir<T: Scalar>(dir: impl AsRef<FsPath>) -> Result<Network<T>> {
    let dir = dir.as_ref();
    load_network(
        dir.join(NODES_FILE),
        dir.join(LINKS_FILE),
        dir.join(OD_FILE),
        dir.join(PATHS_FILE),
    )
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate_dir`]: every check with its verdict.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<width$}  {}  {}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            );
        }
        s
    }
}

/// Runs every instance check without solving anything.
pub fn validate_dir(dir: impl AsRef<FsPath>) -> ValidationReport {
    let dir = dir.as_ref();
    let mut report = ValidationReport::default();
    for file in [NODES_FILE, LINKS_FILE, OD_FILE, PATHS_FILE] {
        let path = dir.join(file);
        match read_csv(&path) {
            Ok(f) => report.push(&format!("parse {file}"), true, format!("{} rows", f.rows.len())),
            Err(e) => report.push(&format!("parse {file}"), false, e.to_string()),
        }
    }
    let net = match load_dir::<f64>(dir) {
        Ok(net) => {
            report.push(
                "load and validate",
                true,
                format!(
                    "{} links, {} nodes, {} O-D pairs, {} paths",
                    net.links.len(),
                    net.nodes.len(),
                    net.ods.len(),
                    net.paths.len()
                ),
            );
            net
        }
        Err(e) => {
            report.push("load and validate", false, e.to_string());
            return report;
        }
    };
    let bad = net.unreachable_path_links();
    report.push(
        "path links reachable from origin",
        bad.is_empty(),
        if bad.is_empty() { String::new() } else { format!("{} unreachable (path, link) pairs", bad.len()) },
    );
    let used: HashSet<usize> = net.paths.iter().flat_map(|p| p.links.iter().copied()).collect();
    report.push(
        "links used by some path",
        true,
        format!("{} of {} links", used.len(), net.links.len()),
    );
    let dt_max = net.links.iter().map(Link::cfl_limit).fold(f64::INFINITY, f64::min);
    report.push("largest CFL-admissible dt", true, format!("{dt_max} h"));
    let origins = net.junctions.iter().filter(|j| j.role.origin).count();
    let destinations = net.junctions.iter().filter(|j| j.role.destination).count();
    report.push(
        "junction roles",
        true,
        format!("{origins} origin nodes, {destinations} destination nodes"),
    );
    report
}
