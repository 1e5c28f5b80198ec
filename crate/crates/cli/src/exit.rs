//! Process exit codes. Every pipeline error class has its own code.

use pcs_core::pipeline::PipelineError;

pub const SUCCESS: u8 = 0;
/// Unexpected failure not attributable to any error class.
pub const INTERNAL: u8 = 1;
/// Invalid flag combination; reported by the argument parser.
pub const USAGE: u8 = 2;
pub const OUTPUT: u8 = 17;

/// `(error class, exit code)`, in code order.
pub const CODES: &[(&str, u8)] = &[
    ("EmptyQuery", 3),
    ("UnterminatedPhrase", 4),
    ("ApiUnreachable", 5),
    ("ApiSchemaMismatch", 6),
    ("PageCapExceeded", 7),
    ("EmptyCorpus", 8),
    ("NoPositivePeak", 9),
    ("UnknownFixture", 10),
    ("FixtureQueryMismatch", 11),
    ("CorruptEntry", 12),
    ("CacheError", 13),
    ("ApiRejected", 14),
    ("InvalidConfig", 15),
    ("MissingQuery", 16),
    ("OutputError", OUTPUT),
];

pub fn code_for(class: &str) -> u8 {
    CODES
        .iter()
        .find(|(name, _)| *name == class)
        .map_or(INTERNAL, |(_, code)| *code)
}

pub fn for_error(error: &PipelineError) -> u8 {
    code_for(error.code())
}

pub fn help_text() -> String {
    let mut text = String::from("Exit codes:\n  0  success\n  1  internal error\n  2  usage error\n");
    for (name, code) in CODES {
        text.push_str(&format!("  {code:<2} {name}\n"));
    }
    text.push_str("\nA NoPositivePeak run still writes its report.");
    text
}
