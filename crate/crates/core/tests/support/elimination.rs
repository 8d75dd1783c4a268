//! Exact partition functions and marginals by variable elimination over
//! dense `f64` tables, independent of the library's contraction code.

use loopmp::Graph;

/// Dense table over labelled variables, row-major in `vars` order.
struct Table {
    vars: Vec<usize>,
    vals: Vec<f64>,
}

fn index(vars: &[usize], dims: &[usize], x: &[usize]) -> usize {
    vars.iter().fold(0, |off, &v| off * dims[v] + x[v])
}

/// Product of `tables` summed over `gone`, by enumerating their joint scope.
fn eliminate(tables: &[Table], gone: usize, dims: &[usize]) -> Table {
    let mut vars: Vec<usize> = tables.iter().flat_map(|t| t.vars.iter().copied()).collect();
    vars.sort_unstable();
    vars.dedup();
    let out_vars: Vec<usize> = vars.iter().copied().filter(|&v| v != gone).collect();
    let size: usize = out_vars.iter().map(|&v| dims[v]).product();
    let mut vals = vec![0.0; size];
    let mut x = vec![0usize; dims.len()];
    let total: usize = vars.iter().map(|&v| dims[v]).product();
    for _ in 0..total {
        let w: f64 = tables.iter().map(|t| t.vals[index(&t.vars, dims, &x)]).product();
        vals[index(&out_vars, dims, &x)] += w;
        for &v in vars.iter().rev() {
            x[v] += 1;
            if x[v] < dims[v] {
                break;
            }
            x[v] = 0;
        }
    }
    Table { vars: out_vars, vals }
}

/// Variable elimination in greedy smallest-intermediate order. Returns the
/// log partition function and, if `keep` is given, that variable's marginal.
pub fn elimination_oracle(fg: &Graph, keep: Option<usize>) -> (f64, Vec<f64>) {
    let dims = fg.var_dims();
    let mut tables: Vec<Table> =
        fg.factors().iter().map(|f| Table { vars: f.scope.clone(), vals: f.table.values().to_vec() }).collect();
    let mut log_scale = 0.0;
    let mut left: Vec<usize> = (0..fg.num_variables()).filter(|&v| Some(v) != keep).collect();
    while !left.is_empty() {
        let cost = |v: usize| -> usize {
            let mut vs: Vec<usize> =
                tables.iter().filter(|t| t.vars.contains(&v)).flat_map(|t| t.vars.iter().copied()).collect();
            vs.sort_unstable();
            vs.dedup();
            vs.iter().map(|&u| dims[u]).product()
        };
        let (k, &v) = left.iter().enumerate().min_by_key(|(_, &v)| cost(v)).unwrap();
        left.swap_remove(k);
        let (touch, rest): (Vec<Table>, Vec<Table>) = tables.into_iter().partition(|t| t.vars.contains(&v));
        let mut t = eliminate(&touch, v, dims);
        let m = t.vals.iter().cloned().fold(0.0, f64::max);
        assert!(m > 0.0, "zero partition function");
        t.vals.iter_mut().for_each(|x| *x /= m);
        log_scale += m.ln();
        tables = rest;
        tables.push(t);
    }
    let last = match keep {
        Some(_) => eliminate(&tables, usize::MAX, dims),
        None => Table { vars: vec![], vals: vec![tables.iter().map(|t| t.vals[0]).product()] },
    };
    let z: f64 = last.vals.iter().sum();
    (log_scale + z.ln(), last.vals.iter().map(|x| x / z).collect())
}

/// Largest intermediate table the greedy order would build, without building
/// it. Lets callers skip instances the dense oracle cannot afford.
#[allow(dead_code)]
pub fn elimination_width(fg: &Graph) -> f64 {
    let dims = fg.var_dims();
    let mut scopes: Vec<Vec<usize>> = fg.factors().iter().map(|f| f.scope.clone()).collect();
    let mut left: Vec<usize> = (0..fg.num_variables()).collect();
    let mut widest = 0.0f64;
    while !left.is_empty() {
        let merged = |v: usize| -> Vec<usize> {
            let mut vs: Vec<usize> = scopes.iter().filter(|s| s.contains(&v)).flatten().copied().collect();
            vs.sort_unstable();
            vs.dedup();
            vs
        };
        let size = |vs: &[usize]| vs.iter().map(|&u| dims[u] as f64).product::<f64>();
        let (k, &v) = left.iter().enumerate().min_by(|a, b| size(&merged(*a.1)).total_cmp(&size(&merged(*b.1)))).unwrap();
        left.swap_remove(k);
        let vs = merged(v);
        widest = widest.max(size(&vs));
        scopes.retain(|s| !s.contains(&v));
        scopes.push(vs.into_iter().filter(|&u| u != v).collect());
    }
    widest
}
