use std::fmt;

/// 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Code {
    Lexical,
    Syntax,
    DuplicateFunction,
    CallBeforeDeclaration,
    MainWithParameters,
    ReservedIdentifier,
    NumericLiteral,
    MissingReturn,
    ReturnInMain,
    CallToMain,
    MissingMain,
    ArityMismatch,
    DuplicateParameter,
    LoopCounterAssigned,
}

impl Code {
    pub fn id(self) -> &'static str {
        match self {
            Code::Lexical => "E001",
            Code::Syntax => "E002",
            Code::DuplicateFunction => "E003",
            Code::CallBeforeDeclaration => "E004",
            Code::MainWithParameters => "E005",
            Code::ReservedIdentifier => "E006",
            Code::NumericLiteral => "E007",
            Code::MissingReturn => "E008",
            Code::ReturnInMain => "E009",
            Code::CallToMain => "E010",
            Code::MissingMain => "E011",
            Code::ArityMismatch => "E012",
            Code::DuplicateParameter => "E013",
            Code::LoopCounterAssigned => "W001",
        }
    }

    pub fn is_warning(self) -> bool {
        matches!(self, Code::LoopCounterAssigned)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: Code, pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.code.is_warning() {
            "warning"
        } else {
            "error"
        };
        write!(
            f,
            "{}:{}: {kind}[{}]: {}",
            self.pos.line,
            self.pos.column,
            self.code.id(),
            self.message
        )
    }
}

impl std::error::Error for Diagnostic {}
