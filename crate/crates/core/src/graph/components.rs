use super::{FactorDescriptor, FactorGraph};
use crate::scalar::Scalar;

/// Splits `fg` into connected components, ordered by smallest variable.
pub fn connected_components<T: Scalar>(fg: &FactorGraph<T>) -> Vec<FactorGraph<T>> {
    let n = fg.num_variables();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = count;
        while let Some(v) = stack.pop() {
            for &a in fg.factors_of(v) {
                for &w in &fg.factor(a).scope {
                    if comp[w] == usize::MAX {
                        comp[w] = count;
                        stack.push(w);
                    }
                }
            }
        }
        count += 1;
    }
    if count == 1 {
        return vec![fg.clone()];
    }
    let descs = fg.descriptors();
    (0..count)
        .map(|c| {
            let vars: Vec<usize> = (0..n).filter(|&v| comp[v] == c).collect();
            let names: Vec<String> = vars.iter().map(|&v| fg.var_name(v).to_string()).collect();
            let dims: Vec<usize> = vars.iter().map(|&v| fg.var_dim(v)).collect();
            let fs: Vec<FactorDescriptor<T>> = descs
                .iter()
                .zip(fg.factors())
                .filter(|(_, f)| comp[f.scope[0]] == c)
                .map(|(d, _)| d.clone())
                .collect();
            FactorGraph::with_dims(fg.alphabet_size(), &names, &dims, fs).expect("component of a valid graph")
        })
        .collect()
}
