#[test]
fn count_standardization_material() {
    let spec = lambda_harness::CorpusSpec { max_nodes: 6, n_vars: 2, n_consts: 1, ..Default::default() };
    let corpus = lambda_harness::enum_terms(&spec);
    let delta = lambda_core::DeltaTable::new();
    let mut with_redex = 0;
    let mut total_traces = 0u64;
    let mut max_len = 0usize;
    for t in &corpus {
        if !lambda_core::cbn::step_cbn(t, &delta).is_empty() { with_redex += 1; }
        let mut stack = vec![vec![t.clone()]];
        while let Some(tr) = stack.pop() {
            total_traces += 1;
            max_len = max_len.max(tr.len() - 1);
            if tr.len() <= 3 {
                for (_, y) in lambda_core::cbn::step_cbn(tr.last().unwrap(), &delta) {
                    let mut next = tr.clone(); next.push(y); stack.push(next);
                }
            }
        }
    }
    panic!("corpus {} terms, {} with a redex, {} traces, max len {}", corpus.len(), with_redex, total_traces, max_len);
}
