use serde::{Deserialize, Serialize};

/// How a sentence is split into tokens.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenizerMode {
    /// CJK when the sentence contains an ideograph, whitespace otherwise.
    #[default]
    Auto,
    Cjk,
    #[serde(rename = "ws")]
    Whitespace,
}

impl TokenizerMode {
    pub fn parse(s: &str) -> Option<TokenizerMode> {
        match s {
            "auto" => Some(TokenizerMode::Auto),
            "cjk" => Some(TokenizerMode::Cjk),
            "ws" | "whitespace" => Some(TokenizerMode::Whitespace),
            _ => None,
        }
    }

    /// Concrete mode for `text`.
    pub fn resolve(self, text: &str) -> TokenizerMode {
        match self {
            TokenizerMode::Auto if text.chars().any(is_ideograph) => TokenizerMode::Cjk,
            TokenizerMode::Auto => TokenizerMode::Whitespace,
            m => m,
        }
    }

    /// Separator used when a token span is rendered back to text.
    pub fn joiner(self) -> &'static str {
        match self {
            TokenizerMode::Cjk => "",
            _ => " ",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
    pub mode: TokenizerMode,
}

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Wraps pre-split tokens, dropping empty ones.
    pub fn from_tokens<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> TokenSeq {
        TokenSeq {
            tokens: tokens
                .into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty())
                .collect(),
            mode: TokenizerMode::Whitespace,
        }
    }
}

pub fn is_ideograph(c: char) -> bool {
    matches!(c,
        '\u{4E00}'..='\u{9FFF}'
        | '\u{3400}'..='\u{4DBF}'
        | '\u{F900}'..='\u{FAFF}'
        | '\u{20000}'..='\u{2A6DF}')
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '，' | '。'
                | '、'
                | '；'
                | '：'
                | '！'
                | '？'
                | '（'
                | '）'
                | '“'
                | '”'
                | '‘'
                | '’'
                | '…'
                | '—'
        )
}

/// Splits `text` into tokens.
///
/// Whitespace mode splits on Unicode whitespace and peels trailing
/// punctuation off each word, one token per mark. CJK mode emits every
/// ideograph alone, groups runs of ASCII letters and digits (a `.` between
/// digits stays inside the run), skips whitespace and emits anything else
/// as a single-character token.
pub fn tokenize(text: &str, mode: TokenizerMode) -> TokenSeq {
    let mode = mode.resolve(text);
    let tokens = match mode {
        TokenizerMode::Cjk => split_cjk(text),
        _ => split_whitespace(text),
    };
    TokenSeq { tokens, mode }
}

fn split_whitespace(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let trimmed = word.trim_end_matches(is_punct);
        if !trimmed.is_empty() {
            out.push(trimmed.to_string());
        }
        out.extend(word[trimmed.len()..].chars().map(String::from));
    }
    out
}

fn split_cjk(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphanumeric() {
            let start = i;
            while i < chars.len() {
                let d = chars[i];
                let decimal_point = d == '.'
                    && i > start
                    && chars[i - 1].is_ascii_digit()
                    && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
                if d.is_ascii_alphanumeric() || decimal_point {
                    i += 1;
                } else {
                    break;
                }
            }
            out.push(chars[start..i].iter().collect());
        } else {
            out.push(c.to_string());
            i += 1;
        }
    }
    out
}
