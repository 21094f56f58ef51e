use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Plus,
    Bar2,
    Arrow,
    FatArrow,
    NotEq,
    Hash,
    Colon,
    Le,
    Tilde,
    Bang,
    Eq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Plus => "+",
            Tok::Bar2 => "||",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::NotEq => "!=",
            Tok::Hash => "#",
            Tok::Colon => ":",
            Tok::Le => "<=",
            Tok::Tilde => "~",
            Tok::Bang => "!",
            Tok::Eq => "=",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    /// 1-based column of the first character.
    pub column: usize,
}

/// A character the lexer could not start a token with, by 1-based column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub column: usize,
    pub found: char,
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Tokenizes a single line.
pub fn lex_line(line: &str) -> Result<Vec<Spanned>, LexError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('|', Some('|')) => (Tok::Bar2, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('=', Some('>')) => (Tok::FatArrow, 2),
            ('!', Some('=')) => (Tok::NotEq, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            ('.', _) => (Tok::Dot, 1),
            ('+', _) => (Tok::Plus, 1),
            ('#', _) => (Tok::Hash, 1),
            (':', _) => (Tok::Colon, 1),
            ('~', _) => (Tok::Tilde, 1),
            ('!', _) => (Tok::Bang, 1),
            ('=', _) => (Tok::Eq, 1),
            _ => return Err(LexError { column, found: c }),
        };
        out.push(Spanned { tok, column });
        i += width;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_character_operators() {
        let toks: Vec<Tok> = lex_line("a || b -> c => d != e <= f")
            .unwrap()
            .into_iter()
            .map(|s| s.tok)
            .collect();
        assert_eq!(toks[1], Tok::Bar2);
        assert_eq!(toks[3], Tok::Arrow);
        assert_eq!(toks[5], Tok::FatArrow);
        assert_eq!(toks[7], Tok::NotEq);
        assert_eq!(toks[9], Tok::Le);
    }

    #[test]
    fn prefixes_and_columns() {
        let toks = lex_line("  !~tbc2JUB").unwrap();
        assert_eq!(toks[0], Spanned { tok: Tok::Bang, column: 3 });
        assert_eq!(toks[1].tok, Tok::Tilde);
        assert_eq!(toks[2], Spanned { tok: Tok::Ident("tbc2JUB".into()), column: 5 });
    }

    #[test]
    fn stray_character() {
        assert_eq!(lex_line("pi(a, $x, b)"), Err(LexError { column: 7, found: '$' }));
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("tbc2JUB"));
        assert!(is_identifier("transport_packets"));
        assert!(!is_identifier("_x"));
        assert!(!is_identifier("2x"));
        assert!(!is_identifier(""));
    }
}
