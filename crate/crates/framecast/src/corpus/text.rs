//! Raw-text cleanup: ASCII transliteration, chapter-span extraction,
//! rule-based sentence splitting, and word tokenization.

use regex::Regex;
use std::fmt;
use std::sync::OnceLock;

/// Why a raw document was dropped during ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    /// Fewer than two chapter headings: the retained span cannot be bounded.
    ChapterTitlesUnlocatable,
    /// Below the configured minimum size.
    BelowMinBytes { size: usize, min: usize },
    /// Looks like markup rather than prose.
    HtmlDetected,
    /// Nothing left after cleaning and splitting.
    NoSentences,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::ChapterTitlesUnlocatable => write!(f, "chapter titles unlocatable"),
            Rejection::BelowMinBytes { size, min } => {
                write!(f, "document is {size} bytes, below the {min}-byte minimum")
            }
            Rejection::HtmlDetected => write!(f, "html markup detected"),
            Rejection::NoSentences => write!(f, "no sentences after cleaning"),
        }
    }
}

/// Map text to pure ASCII. Accented letters fold to their base letters,
/// typographic punctuation maps to ASCII equivalents, anything unmapped
/// is dropped.
pub fn transliterate(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if c.is_ascii() {
            out.push(c);
            continue;
        }
        match c {
            'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'ā' | 'ă' | 'ą' => out.push('a'),
            'À' | 'Á' | 'Â' | 'Ã' | 'Ä' | 'Å' | 'Ā' => out.push('A'),
            'ç' | 'ć' | 'č' => out.push('c'),
            'Ç' | 'Ć' | 'Č' => out.push('C'),
            'è' | 'é' | 'ê' | 'ë' | 'ē' | 'ĕ' | 'ė' | 'ę' | 'ě' => out.push('e'),
            'È' | 'É' | 'Ê' | 'Ë' | 'Ē' => out.push('E'),
            'ì' | 'í' | 'î' | 'ï' | 'ī' | 'ĭ' | 'į' => out.push('i'),
            'Ì' | 'Í' | 'Î' | 'Ï' | 'Ī' => out.push('I'),
            'ñ' | 'ń' | 'ň' => out.push('n'),
            'Ñ' | 'Ń' => out.push('N'),
            'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'ō' | 'ŏ' | 'ő' => out.push('o'),
            'Ò' | 'Ó' | 'Ô' | 'Õ' | 'Ö' | 'Ø' | 'Ō' => out.push('O'),
            'ù' | 'ú' | 'û' | 'ü' | 'ū' | 'ŭ' | 'ů' => out.push('u'),
            'Ù' | 'Ú' | 'Û' | 'Ü' | 'Ū' => out.push('U'),
            'ý' | 'ÿ' => out.push('y'),
            'Ý' => out.push('Y'),
            'š' | 'ś' => out.push('s'),
            'Š' | 'Ś' => out.push('S'),
            'ž' | 'ź' | 'ż' => out.push('z'),
            'Ž' | 'Ź' | 'Ż' => out.push('Z'),
            'ł' => out.push('l'),
            'Ł' => out.push('L'),
            'đ' | 'ð' => out.push('d'),
            'Đ' => out.push('D'),
            'ť' => out.push('t'),
            'ř' => out.push('r'),
            'ğ' => out.push('g'),
            'æ' => out.push_str("ae"),
            'Æ' => out.push_str("AE"),
            'œ' => out.push_str("oe"),
            'Œ' => out.push_str("OE"),
            'ß' => out.push_str("ss"),
            'þ' => out.push_str("th"),
            'Þ' => out.push_str("Th"),
            // typographic punctuation
            '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '\u{2032}' => out.push('\''),
            '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{2033}' | '«' | '»' => {
                out.push('"')
            }
            '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2015}'
            | '\u{2212}' => out.push('-'),
            '\u{2026}' => out.push_str("..."),
            '\u{00A0}' | '\u{2000}'..='\u{200B}' | '\u{202F}' | '\u{3000}' => out.push(' '),
            '¡' => out.push('!'),
            '¿' => out.push('?'),
            '·' | '\u{2022}' => out.push('*'),
            '×' => out.push('x'),
            '÷' => out.push('/'),
            '°' => out.push_str(" degrees"),
            _ => {} // unmapped characters are dropped
        }
    }
    out
}

fn chapter_heading_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        // A heading line: optional indentation, "Chapter" in any case,
        // then a number, roman numeral, or word.
        Regex::new(r"(?mi)^[ \t]*chapter[ \t]+(\d+|[a-z]+)\b").expect("static regex")
    })
}

/// Keep the span from the first chapter heading up to (excluding) the last
/// chapter heading, dropping front matter, back matter, and the final
/// chapter. Rejects texts with fewer than two heading matches.
pub fn clean_book(raw: &str) -> Result<String, Rejection> {
    let starts: Vec<usize> = chapter_heading_re().find_iter(raw).map(|m| m.start()).collect();
    if starts.len() < 2 {
        return Err(Rejection::ChapterTitlesUnlocatable);
    }
    let first = starts[0];
    let last = *starts.last().expect("at least two matches");
    Ok(raw[first..last].to_string())
}

/// Crude markup detector for the ingestion filter.
pub fn looks_like_html(raw: &str) -> bool {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"(?i)<(html|body|head|div|span|table|br|p)\b[^>]*>|</[a-z]+>|&nbsp;")
            .expect("static regex")
    });
    re.is_match(raw)
}

/// Words that take a period without ending a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "prof", "capt", "col", "gen", "lt", "sgt", "rev", "hon", "sr",
    "jr", "mt", "no", "vs", "vol", "dept", "univ", "assn", "bros", "co", "corp", "inc", "ltd",
    "fig", "al", "ed", "eds", "pp", "cf", "sq", "ave", "blvd", "rd", "esq", "messrs", "approx",
];

fn word_before(chars: &[char], end: usize) -> String {
    let mut start = end;
    while start > 0 && chars[start - 1].is_alphabetic() {
        start -= 1;
    }
    chars[start..end].iter().collect::<String>().to_lowercase()
}

/// Split cleaned text into sentences on [.?!] followed by whitespace and a
/// capital letter or quote, with an abbreviation exception list. Sentences
/// are trimmed and never empty; their concatenation reproduces the input
/// up to whitespace.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;

    while i < n {
        if matches!(chars[i], '.' | '?' | '!') {
            let mut punct_end = i + 1;
            while punct_end < n && matches!(chars[punct_end], '.' | '?' | '!') {
                punct_end += 1;
            }
            // pull trailing close quotes/brackets into the sentence
            let mut j = punct_end;
            while j < n && matches!(chars[j], '"' | '\'' | ')') {
                j += 1;
            }
            let single_period = chars[i] == '.' && punct_end == i + 1;
            let abbrev = if single_period {
                let word = word_before(&chars, i);
                word.chars().count() == 1 && word.chars().all(|c| c.is_alphabetic())
                    || ABBREVIATIONS.contains(&word.as_str())
            } else {
                false
            };
            let mut k = j;
            while k < n && chars[k].is_whitespace() {
                k += 1;
            }
            let boundary = k > j
                && k < n
                && (chars[k].is_uppercase() || matches!(chars[k], '"' | '\'' | '('));
            if boundary && !abbrev {
                let sentence: String = chars[start..j].iter().collect();
                let trimmed = sentence.trim();
                if !trimmed.is_empty() {
                    sentences.push(trimmed.to_string());
                }
                start = k;
                i = k;
                continue;
            }
        }
        i += 1;
    }
    if start < n {
        let tail: String = chars[start..].iter().collect();
        let trimmed = tail.trim();
        if !trimmed.is_empty() {
            sentences.push(trimmed.to_string());
        }
    }
    sentences
}

/// Split a sentence into surface tokens: alphanumeric runs (with internal
/// apostrophes or hyphens) plus individual punctuation characters.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < n {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() {
            let mut j = i + 1;
            while j < n {
                let cj = chars[j];
                if cj.is_alphanumeric() {
                    j += 1;
                } else if matches!(cj, '\'' | '-')
                    && j + 1 < n
                    && chars[j + 1].is_alphanumeric()
                {
                    j += 2;
                } else {
                    break;
                }
            }
            tokens.push(chars[i..j].iter().collect());
            i = j;
        } else {
            tokens.push(c.to_string());
            i += 1;
        }
    }
    tokens
}
