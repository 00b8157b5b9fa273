//! Feature index sets, kept as ascending `Vec<usize>`.

pub type IndexSet = Vec<usize>;

pub fn normalize(mut set: Vec<usize>) -> IndexSet {
    set.sort_unstable();
    set.dedup();
    set
}

pub fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}

/// `big ∖ small`, both ascending.
pub fn difference(big: &[usize], small: &[usize]) -> IndexSet {
    big.iter().copied().filter(|i| small.binary_search(i).is_err()).collect()
}

pub fn union(a: &[usize], b: &[usize]) -> IndexSet {
    normalize(a.iter().chain(b).copied().collect())
}

pub fn with(set: &[usize], item: usize) -> IndexSet {
    union(set, &[item])
}

pub fn without(set: &[usize], item: usize) -> IndexSet {
    set.iter().copied().filter(|&i| i != item).collect()
}
