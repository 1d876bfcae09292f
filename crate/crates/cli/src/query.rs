//! Terminal version of the feedback loop: enter a query, judge each result,
//! then ask for more, export, start over or quit.

use std::io::{self, BufRead, Write};

use titl_core::{ExportFormat, SearchEngine, SearchMode, SearchResult, Session};

const HELP: &str = "commands: more | export FILE | new | quit";

enum Next {
    More,
    NewQuery,
    Quit,
}

fn read_line(input: &mut impl BufRead) -> io::Result<Option<String>> {
    let mut line = String::new();
    if input.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    Ok(Some(line.trim().to_owned()))
}

fn prompt(out: &mut impl Write, text: &str) -> io::Result<()> {
    write!(out, "{text}")?;
    out.flush()
}

pub fn run(
    engine: &SearchEngine,
    mode: SearchMode,
    k: usize,
    input: &mut impl BufRead,
    out: &mut impl Write,
) -> io::Result<()> {
    loop {
        prompt(out, "query> ")?;
        let Some(query) = read_line(input)? else {
            return Ok(());
        };
        let mut session = match engine.create_session(&query, mode, k) {
            Ok(session) => session,
            Err(e) => {
                writeln!(out, "{e}")?;
                continue;
            }
        };
        loop {
            let batch = engine.next_results(&mut session);
            if batch.is_empty() {
                writeln!(out, "(no more sentences)")?;
            } else {
                print_batch(out, &batch)?;
                if !judge_batch(&mut session, &batch, input, out)? {
                    return Ok(());
                }
            }
            match command(engine, &session, input, out)? {
                Next::More => continue,
                Next::NewQuery => break,
                Next::Quit => return Ok(()),
            }
        }
    }
}

fn print_batch(out: &mut impl Write, batch: &[SearchResult]) -> io::Result<()> {
    for r in batch {
        writeln!(out, "{:>3}. [{}] {:.4}  {}", r.rank, r.sentence_id, r.score, r.text)?;
    }
    Ok(())
}

/// Asks for a judgment on every result. Returns false on end of input.
fn judge_batch(
    session: &mut Session,
    batch: &[SearchResult],
    input: &mut impl BufRead,
    out: &mut impl Write,
) -> io::Result<bool> {
    for r in batch {
        loop {
            prompt(out, &format!("#{} [{}] relevant? (r/i/s) ", r.rank, r.sentence_id))?;
            let Some(answer) = read_line(input)? else {
                return Ok(false);
            };
            let relevant = match answer.as_str() {
                "r" => Some(true),
                "i" => Some(false),
                "s" | "" => None,
                _ => {
                    writeln!(out, "please answer r (relevant), i (irrelevant) or s (skip)")?;
                    continue;
                }
            };
            if let Some(relevant) = relevant {
                session
                    .record_feedback(r.sentence_id, relevant)
                    .map_err(|e| io::Error::other(e.to_string()))?;
            }
            break;
        }
    }
    Ok(true)
}

fn command(
    engine: &SearchEngine,
    session: &Session,
    input: &mut impl BufRead,
    out: &mut impl Write,
) -> io::Result<Next> {
    loop {
        prompt(out, "> ")?;
        let Some(line) = read_line(input)? else {
            return Ok(Next::Quit);
        };
        let mut parts = line.splitn(2, char::is_whitespace);
        match (parts.next().unwrap_or(""), parts.next().map(str::trim)) {
            ("more" | "m", None) => return Ok(Next::More),
            ("new" | "n", None) => return Ok(Next::NewQuery),
            ("quit" | "q", None) => return Ok(Next::Quit),
            ("export", Some(path)) if !path.is_empty() => {
                let doc = engine.export(session, ExportFormat::Txt);
                match std::fs::write(path, &doc) {
                    Ok(()) => writeln!(out, "wrote {} sentences to {path}", session.relevant.len())?,
                    Err(e) => writeln!(out, "cannot write {path}: {e}")?,
                }
            }
            _ => writeln!(out, "{HELP}")?,
        }
    }
}
