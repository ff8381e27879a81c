//! Rule-based lemmatizer used for trigger lookup.
//!
//! Lowercases, consults a bundled exception table, then applies ordered
//! suffix rules: ies -> y, sses -> ss, es -> e-or-drop, s -> drop,
//! ed -> drop-or-e, ing -> drop-or-e, with consonant-doubling repair.
//! Total on any token; unknown tokens pass through lowercased. Idempotent
//! on its own outputs.

/// Irregular forms and frequent words the suffix rules would mangle.
/// Values must themselves be fixed points of `lemmatize`.
fn exception(word: &str) -> Option<&'static str> {
    Some(match word {
        // be / have / do
        "am" | "is" | "are" | "was" | "were" | "been" | "being" => "be",
        "has" | "had" | "having" => "have",
        "did" | "done" => "do",
        // irregular pasts and participles
        "went" | "gone" => "go",
        "said" => "say",
        "made" | "making" => "make",
        "came" | "coming" => "come",
        "took" | "taken" | "taking" => "take",
        "saw" | "seen" => "see",
        "knew" | "known" => "know",
        "got" | "gotten" => "get",
        "gave" | "given" | "giving" => "give",
        "found" => "find",
        "thought" => "think",
        "told" => "tell",
        "became" | "becoming" => "become",
        "left" => "leave",
        "felt" => "feel",
        "kept" => "keep",
        "began" | "begun" => "begin",
        "brought" => "bring",
        "wrote" | "written" | "writing" => "write",
        "stood" => "stand",
        "heard" => "hear",
        "meant" => "mean",
        "met" => "meet",
        "ran" => "run",
        "paid" => "pay",
        "sat" => "sit",
        "spoke" | "spoken" => "speak",
        "led" => "lead",
        "grew" | "grown" => "grow",
        "lost" | "losing" => "lose",
        "fell" | "fallen" => "fall",
        "sent" => "send",
        "built" => "build",
        "understood" => "understand",
        "drew" | "drawn" => "draw",
        "broke" | "broken" => "break",
        "spent" => "spend",
        "caught" => "catch",
        "bought" => "buy",
        "sought" => "seek",
        "fought" => "fight",
        "taught" => "teach",
        "held" => "hold",
        "wore" | "worn" => "wear",
        "chose" | "chosen" | "choosing" => "choose",
        "ate" | "eaten" => "eat",
        "drank" | "drunk" => "drink",
        "drove" | "driven" | "driving" => "drive",
        "flew" | "flown" => "fly",
        "forgot" | "forgotten" => "forget",
        "hid" | "hidden" | "hiding" => "hide",
        "rode" | "ridden" | "riding" => "ride",
        "rose" | "risen" | "rising" => "rise",
        "sang" | "sung" => "sing",
        "slept" => "sleep",
        "stole" | "stolen" => "steal",
        "swam" | "swum" => "swim",
        "threw" | "thrown" => "throw",
        "woke" | "woken" | "waking" => "wake",
        "won" => "win",
        "lit" => "light",
        "bore" | "born" | "borne" => "bear",
        "shook" | "shaken" | "shaking" => "shake",
        "slid" | "sliding" => "slide",
        "struck" => "strike",
        "swore" | "sworn" => "swear",
        "tore" | "torn" => "tear",
        "bent" => "bend",
        "bound" => "bind",
        "crept" => "creep",
        "dealt" => "deal",
        "dug" => "dig",
        "fed" => "feed",
        "fled" => "flee",
        "froze" | "frozen" => "freeze",
        "hung" => "hang",
        "laid" => "lay",
        "shot" => "shoot",
        "shone" => "shine",
        "sold" => "sell",
        "spun" => "spin",
        "sprang" | "sprung" => "spring",
        "stuck" => "stick",
        "stung" => "sting",
        "swept" => "sweep",
        "swung" => "swing",
        "wound" => "wind",
        "wept" => "weep",
        "dying" => "die",
        "lying" => "lie",
        "tying" => "tie",
        // regular verbs whose elided -e the rules cannot recover
        "hoped" | "hoping" => "hope",
        "smiled" | "smiling" => "smile",
        "living" => "live",
        "hating" | "hated" => "hate",
        "noted" | "noting" => "note",
        "voted" | "voting" => "vote",
        "biting" => "bite",
        "shining" => "shine",
        "stated" | "stating" => "state",
        "tasted" | "tasting" => "taste",
        "wasted" | "wasting" => "waste",
        "judged" | "judging" => "judge",
        "changed" | "changing" => "change",
        "managed" | "managing" => "manage",
        "imagined" | "imagining" => "imagine",
        "used" | "using" => "use",
        // irregular plurals
        "men" => "man",
        "women" => "woman",
        "children" => "child",
        "feet" => "foot",
        "teeth" => "tooth",
        "mice" => "mouse",
        "geese" => "goose",
        "oxen" => "ox",
        "wolves" => "wolf",
        "knives" => "knife",
        "wives" => "wife",
        "leaves" => "leaf",
        "loaves" => "loaf",
        "shelves" => "shelf",
        "thieves" => "thief",
        "halves" => "half",
        "selves" => "self",
        "scarves" => "scarf",
        "calves" => "calf",
        "elves" => "elf",
        // words the plain rules would mangle
        "news" => "news",
        "always" => "always",
        "perhaps" => "perhaps",
        "during" => "during",
        "evening" => "evening",
        "morning" => "morning",
        "nothing" => "nothing",
        "something" => "something",
        "anything" => "anything",
        "everything" => "everything",
        "species" => "species",
        "series" => "series",
        "buses" => "bus",
        "gases" => "gas",
        _ => return None,
    })
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(is_vowel)
}

/// Consonants that double under inflection (stopped -> stop, running -> run).
/// `l`, `s`, `f`, `z` stay doubled (call, pass, stuff, buzz).
fn undoubles(c: char) -> bool {
    matches!(c, 'b' | 'd' | 'g' | 'm' | 'n' | 'p' | 'r' | 't')
}

/// Fix a stem left over after removing -ed/-ing: undouble inflection
/// doubling, or restore an elided final -e where the pattern is reliable.
fn repair(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 2 && chars[n - 1] == chars[n - 2] && undoubles(chars[n - 1]) {
        return chars[..n - 1].iter().collect();
    }
    let last = chars[n - 1];
    if matches!(last, 'c' | 'v' | 'u') || (n >= 2 && last == 's' && is_vowel(chars[n - 2])) {
        let mut s = stem.to_string();
        s.push('e');
        return s;
    }
    stem.to_string()
}

/// Map a single token to its lookup lemma.
pub fn lemmatize(token: &str) -> String {
    let w = token.trim().to_lowercase();
    if let Some(lemma) = exception(&w) {
        return lemma.to_string();
    }
    let n = w.len();

    if w.ends_with("ies") {
        let stem = &w[..n - 3];
        if stem.chars().count() >= 2 {
            return format!("{stem}y");
        }
        if stem.chars().count() == 1 {
            return format!("{stem}ie");
        }
    }
    if w.ends_with("sses") {
        return w[..n - 2].to_string();
    }
    if w.ends_with("es") {
        let stem = &w[..n - 2];
        if stem.chars().count() >= 2 {
            let drop_both = stem.ends_with(['x', 'z', 'o'])
                || stem.ends_with("ch")
                || stem.ends_with("sh");
            return if drop_both {
                stem.to_string()
            } else {
                w[..n - 1].to_string()
            };
        }
    }
    if w.ends_with('s')
        && !w.ends_with("ss")
        && !w.ends_with("us")
        && !w.ends_with("is")
        && w.chars().count() >= 4
    {
        return w[..n - 1].to_string();
    }
    if w.ends_with("ied") {
        let stem = &w[..n - 3];
        if stem.chars().count() >= 2 {
            return format!("{stem}y");
        }
        if stem.chars().count() == 1 {
            return format!("{stem}ie");
        }
    }
    if w.ends_with("ed") && w.chars().count() >= 4 {
        let stem = &w[..n - 2];
        if has_vowel(stem) {
            return repair(stem);
        }
    }
    if w.ends_with("ing") && w.chars().count() >= 5 {
        let stem = &w[..n - 3];
        if stem.chars().count() >= 2 && has_vowel(stem) {
            return repair(stem);
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn suffix_rules_by_hand() {
        // ed -> drop
        assert_eq!(lemmatize("remained"), "remain");
        assert_eq!(lemmatize("walked"), "walk");
        // lowercase only
        assert_eq!(lemmatize("Father"), "father");
        // ing-drop plus doubling repair
        assert_eq!(lemmatize("running"), "run");
        assert_eq!(lemmatize("stopped"), "stop");
        // elided -e restoration
        assert_eq!(lemmatize("danced"), "dance");
        assert_eq!(lemmatize("loved"), "love");
        assert_eq!(lemmatize("argued"), "argue");
        assert_eq!(lemmatize("closed"), "close");
        // plural family
        assert_eq!(lemmatize("stories"), "story");
        assert_eq!(lemmatize("ties"), "tie");
        assert_eq!(lemmatize("passes"), "pass");
        assert_eq!(lemmatize("boxes"), "box");
        assert_eq!(lemmatize("makes"), "make");
        assert_eq!(lemmatize("fathers"), "father");
        // natural doubles survive
        assert_eq!(lemmatize("called"), "call");
        assert_eq!(lemmatize("passed"), "pass");
    }

    #[test]
    fn exceptions_first() {
        assert_eq!(lemmatize("was"), "be");
        assert_eq!(lemmatize("Went"), "go");
        assert_eq!(lemmatize("children"), "child");
        assert_eq!(lemmatize("morning"), "morning");
    }

    #[test]
    fn short_words_untouched() {
        for w in ["his", "its", "yes", "this", "red", "bed", "sing", "bring", "thing"] {
            assert_eq!(lemmatize(w), w);
        }
    }

    proptest! {
        #[test]
        fn idempotent_on_outputs(token in "[a-z]{0,12}") {
            let once = lemmatize(&token);
            prop_assert_eq!(lemmatize(&once), once);
        }

        #[test]
        fn total_and_lowercase(token in "\\PC{0,12}") {
            let out = lemmatize(&token);
            prop_assert_eq!(out.to_lowercase(), out.clone());
            prop_assert_eq!(lemmatize(&out), out);
        }
    }
}
