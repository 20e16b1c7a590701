//! CPLEX LP text export. Output depends only on the model, so equal
//! models always produce identical bytes.

use std::fmt::Write;

use crate::model::IlpModel;

const TERMS_PER_LINE: usize = 8;

fn coefficient(c: f64) -> String {
    if c == 1.0 {
        String::new()
    } else {
        format!("{} ", c.abs())
    }
}

fn expression(out: &mut String, model: &IlpModel, terms: &[(usize, f64)]) {
    for (k, &(var, c)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        let c = if c < 0.0 { -c } else { c };
        if k == 0 && sign == "+" {
            write!(out, " {}{}", coefficient(c), model.variables[var].name).unwrap();
        } else {
            write!(out, " {sign} {}{}", coefficient(c), model.variables[var].name).unwrap();
        }
    }
}

pub fn export_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "\\ {} n={} nodes={}",
        model.meta.formulation.name(),
        model.meta.n,
        model.meta.node_count
    )
    .unwrap();
    out.push_str("Maximize\n obj:");
    match &model.objective {
        Some(obj) => expression(&mut out, model, &obj.terms),
        // constant zero objective keeps every reader happy
        None => write!(out, " 0 {}", model.variables[0].name).unwrap(),
    }
    out.push_str("\nSubject To\n");
    for row in &model.constraints {
        write!(out, " {}:", row.name).unwrap();
        expression(&mut out, model, &row.terms);
        writeln!(out, " {} {}", row.relation.symbol(), row.rhs).unwrap();
    }
    out.push_str("Binary\n");
    for chunk in model.variables.chunks(TERMS_PER_LINE) {
        out.push(' ');
        let names: Vec<&str> = chunk.iter().map(|v| v.name.as_str()).collect();
        out.push_str(&names.join(" "));
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeometricGraph;
    use crate::model::*;

    #[test]
    fn p2_optimal_soft_text() {
        let m = build_optimal_soft(&GeometricGraph::path(2), 3).unwrap();
        let expected = "\
\\ optimal n=3 nodes=2
Maximize
 obj: y_0_1 + y_0_2 + y_0_3 + y_1_1 + y_1_2 + y_1_3
Subject To
 cap_0: x_0_1 + x_0_2 + x_0_3 = 1
 cap_1: x_1_1 + x_1_2 + x_1_3 = 1
 cov_0_1: y_0_1 - x_0_1 - x_1_1 <= 0
 cov_0_2: y_0_2 - x_0_2 - x_1_2 <= 0
 cov_0_3: y_0_3 - x_0_3 - x_1_3 <= 0
 cov_1_1: y_1_1 - x_0_1 - x_1_1 <= 0
 cov_1_2: y_1_2 - x_0_2 - x_1_2 <= 0
 cov_1_3: y_1_3 - x_0_3 - x_1_3 <= 0
Binary
 x_0_1 x_0_2 x_0_3 x_1_1 x_1_2 x_1_3 y_0_1 y_0_2
 y_0_3 y_1_1 y_1_2 y_1_3
End
";
        assert_eq!(export_lp(&m), expected);
        assert_eq!(export_lp(&m.clone()), export_lp(&m));
    }

    #[test]
    fn feasibility_gets_zero_objective() {
        let m = build_domatic_feasibility(&GeometricGraph::complete(3), 3).unwrap();
        let text = export_lp(&m);
        assert!(text.contains("Maximize\n obj: 0 x_0_1\nSubject To\n"));
        assert!(text.contains(" cov_2_3: x_0_3 + x_1_3 + x_2_3 >= 1\n"));
    }

    #[test]
    fn costs_and_links() {
        let g = GeometricGraph::path(2);
        let costs = CostVector::new(vec![0.5, 0.5, 1.0]).unwrap();
        let m = build_soft_variant(&g, 3, Formulation::MaximalSoft, CapacityMode::cost(costs)).unwrap();
        let text = export_lp(&m);
        assert!(text.contains(" cap_0: 0.5 x_0_1 + 0.5 x_0_2 + x_0_3 = 1\n"));
        assert!(text.contains(" comp_1_3: z_1 - y_1_3 <= 0\n"));
        assert!(text.contains("Maximize\n obj: z_0 + z_1\n"));
    }

    #[test]
    fn long_rows_wrap() {
        let m = build_optimal_soft(&GeometricGraph::complete(12), 2).unwrap();
        let text = export_lp(&m);
        assert!(text.lines().all(|l| l.len() < 255));
        assert!(text.contains("\n    + y_4_1"));
    }
}
