use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Txt,
    Csv,
    Json,
}

impl ExportFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Txt => "text/plain; charset=utf-8",
            ExportFormat::Csv => "text/csv; charset=utf-8",
            ExportFormat::Json => "application/json",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Txt => "txt",
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "txt" => Ok(ExportFormat::Txt),
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::Validation(format!(
                "unknown export format {other:?} (expected txt, csv or json)"
            ))),
        }
    }
}

#[derive(Serialize)]
struct ExportRow<'a> {
    id: u64,
    text: &'a str,
}

pub(crate) fn render<'a>(format: ExportFormat, rows: impl Iterator<Item = (u64, &'a str)>) -> Vec<u8> {
    match format {
        ExportFormat::Txt => {
            let mut out = String::new();
            for (_, text) in rows {
                out.push_str(text);
                out.push('\n');
            }
            out.into_bytes()
        }
        ExportFormat::Csv => {
            let mut out = String::from("sentence_id,text\r\n");
            for (id, text) in rows {
                out.push_str(&id.to_string());
                out.push(',');
                out.push_str(&csv_field(text));
                out.push_str("\r\n");
            }
            out.into_bytes()
        }
        ExportFormat::Json => {
            let rows: Vec<ExportRow> = rows.map(|(id, text)| ExportRow { id, text }).collect();
            serde_json::to_vec(&rows).expect("serializing strings cannot fail")
        }
    }
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_owned()
    }
}
