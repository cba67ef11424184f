//! Ordered DRAM command traces.
//!
//! A trace is the single input to latency and energy accounting. Each
//! primitive (AAP, AP, PSM copy) is a contiguous run of entries whose first
//! entry carries `aap_boundary = true`.

use std::fmt;
use std::io;

use serde::Serialize;

use crate::controller::AddressGroup;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Command {
    Activate,
    Precharge,
    Read,
    Write,
    Transfer,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Activate => "ACTIVATE",
            Command::Precharge => "PRECHARGE",
            Command::Read => "READ",
            Command::Write => "WRITE",
            Command::Transfer => "TRANSFER",
        })
    }
}

/// Row decoder that handles an `ACTIVATE`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decoder {
    BGroup,
    CdGroup,
}

impl Decoder {
    pub fn for_group(group: AddressGroup) -> Self {
        match group {
            AddressGroup::B(_) => Decoder::BGroup,
            AddressGroup::C(_) | AddressGroup::D(_) => Decoder::CdGroup,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Decoder::BGroup => "b_group",
            Decoder::CdGroup => "cd_group",
        }
    }
}

/// The primitive an entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Primitive {
    /// ACTIVATE, ACTIVATE, PRECHARGE.
    Aap,
    /// ACTIVATE, PRECHARGE.
    Ap,
    /// Inter-bank copy: two ACTIVATEs, one TRANSFER per column, two PRECHARGEs.
    Psm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Row(AddressGroup),
    Column(usize),
    None,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Row(g) => write!(f, "{g}"),
            Target::Column(c) => write!(f, "col{c}"),
            Target::None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TraceEntry {
    pub command: Command,
    pub bank: usize,
    pub subarray: usize,
    pub target: Target,
    /// Wordlines raised by an ACTIVATE; zero for other commands.
    pub wordlines_raised: u8,
    pub decoder: Option<Decoder>,
    /// First command of a primitive.
    pub aap_boundary: bool,
    pub primitive: Primitive,
}

impl TraceEntry {
    pub fn precharge(bank: usize, subarray: usize, primitive: Primitive) -> Self {
        Self {
            command: Command::Precharge,
            bank,
            subarray,
            target: Target::None,
            wordlines_raised: 0,
            decoder: None,
            aap_boundary: false,
            primitive,
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    seq_no: usize,
    command: Command,
    bank: usize,
    subarray: usize,
    address_label: String,
    wordlines_raised: u8,
    decoder: &'a str,
    aap_boundary: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CommandTrace {
    entries: Vec<TraceEntry>,
}

impl CommandTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: TraceEntry) {
        self.entries.push(entry);
    }

    pub fn append(&mut self, other: CommandTrace) {
        self.entries.extend(other.entries);
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Splits the trace into its primitives.
    pub fn primitives(&self) -> impl Iterator<Item = &[TraceEntry]> {
        self.entries.chunk_by(|_, next| !next.aap_boundary)
    }

    pub fn count(&self, primitive: Primitive) -> usize {
        self.primitives()
            .filter(|p| p[0].primitive == primitive)
            .count()
    }

    pub fn count_command(&self, command: Command) -> usize {
        self.entries.iter().filter(|e| e.command == command).count()
    }

    /// Writes `seq_no,command,bank,subarray,address_label,wordlines_raised,decoder,aap_boundary`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (seq_no, e) in self.entries.iter().enumerate() {
            w.serialize(CsvRow {
                seq_no,
                command: e.command,
                bank: e.bank,
                subarray: e.subarray,
                address_label: e.target.to_string(),
                wordlines_raised: e.wordlines_raised,
                decoder: e.decoder.map_or("none", Decoder::label),
                aap_boundary: e.aap_boundary,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory CSV");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

impl<'a> IntoIterator for &'a CommandTrace {
    type Item = &'a TraceEntry;
    type IntoIter = std::slice::Iter<'a, TraceEntry>;
    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}
