mod common;

use probe_core::corpus::load_corpus;
use probe_core::lexer::{count_tokens, tokenize, TokenKind};
use serde_json::json;

/// Token (type, text) pairs from CPython's tokenize, minus the kinds the
/// lexer does not count. f-string pieces (3.12+) are merged back into one
/// STRING token.
const TOKENIZE: &str = r#"
import io, json, sys, tokenize
SKIP = {"COMMENT", "NL", "DEDENT", "ENDMARKER", "ENCODING"}
out = []
for src in json.load(sys.stdin):
    toks, fstring = [], None
    for t in tokenize.generate_tokens(io.StringIO(src).readline):
        name = tokenize.tok_name[t.type]
        if name == "FSTRING_START":
            fstring = [t.start, 1]
            continue
        if fstring is not None:
            if name == "FSTRING_START":
                fstring[1] += 1
            elif name == "FSTRING_END":
                fstring[1] -= 1
                if fstring[1] == 0:
                    lines = src.splitlines(keepends=True)
                    (r0, c0), (r1, c1) = fstring[0], t.end
                    text = "".join(lines[r0 - 1:r1])
                    end = sum(len(l) for l in lines[r0 - 1:r1 - 1]) + c1
                    toks.append(["STRING", text[c0:end]])
                    fstring = None
            continue
        if name in SKIP or (name == "NEWLINE" and t.string == ""):
            continue
        if name in ("LPAR", "RPAR") or t.exact_type != t.type:
            name = "OP"
        toks.append([name, t.string])
    out.append(toks)
json.dump(out, sys.stdout)
"#;

fn kind_name(kind: TokenKind) -> &'static str {
    match kind {
        TokenKind::Name | TokenKind::Keyword => "NAME",
        TokenKind::Number => "NUMBER",
        TokenKind::String => "STRING",
        TokenKind::Op => "OP",
        TokenKind::Newline => "NEWLINE",
        TokenKind::Indent => "INDENT",
    }
}

fn ours(src: &str) -> Vec<(String, String)> {
    tokenize(src)
        .unwrap()
        .iter()
        .map(|t| (kind_name(t.kind).to_string(), t.text(src).to_string()))
        .collect()
}

const SNIPPETS: &[&str] = &[
    "def f(a):\n    return a",
    "x = (1 +\n     2)\n",
    "s = 'a' \"b\" '''c\nd''' rb'\\x00' f\"{x!r:>4}\"\n",
    "if a:\n\tif b:\n\t\tpass\n# c\n\nelse:\n    y = 0x1F + 1_000 + 1e-3 + 2j\n",
    "a = \\\n    b\n",
    "lambda *a, **k: a @ k\n",
    "x = [\n  1,  # one\n  2,\n]\n",
    "async def g():\n    await h() ; return ...\n",
    "x: int = 3 if y else 4\nz //= 2\nw **= -1\nv := 1\n",
    "def é(ñ):\n    return ñ\n",
];

#[test]
fn matches_cpython_on_snippets_and_corpus() {
    let mut sources: Vec<String> = SNIPPETS.iter().map(|s| s.to_string()).collect();
    let corpus = load_corpus(common::seed_dir()).unwrap();
    sources.extend(corpus.seeds.iter().map(|s| s.source.clone()));

    let reference = common::python_json(TOKENIZE, &json!(sources));
    let reference: Vec<Vec<(String, String)>> = serde_json::from_value(reference).unwrap();
    for (src, want) in sources.iter().zip(&reference) {
        let have = ours(src);
        assert_eq!(&have, want, "token stream differs for:\n{src}");
        assert_eq!(count_tokens(src).unwrap(), want.len());
    }
}

#[test]
fn reference_count_for_small_function() {
    assert_eq!(count_tokens("def f(a):\n    return a").unwrap(), 10);
}
