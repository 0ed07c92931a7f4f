//! Tiny CSV builder: 17-significant-digit decimals, LF line endings.

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Text(String),
    Number(f64),
    Integer(u64),
    Empty,
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Text(s) => s.clone(),
            Field::Number(v) => format!("{v:.16e}"),
            Field::Integer(v) => v.to_string(),
            Field::Empty => String::new(),
        }
    }
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        assert_eq!(row.len(), self.header.len(), "row arity mismatch");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Field::render).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}
