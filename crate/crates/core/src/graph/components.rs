/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let up = self.parent[self.parent[x] as usize];
            self.parent[x] = up;
            x = up as usize;
        }
        x
    }

    /// Returns true if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    /// Labels every element by the smallest element of its set.
    pub fn components(mut self) -> Components {
        let n = self.parent.len();
        let mut smallest = vec![u32::MAX; n];
        let roots: Vec<u32> = (0..n)
            .map(|v| {
                let r = self.find(v);
                smallest[r] = smallest[r].min(v as u32);
                r as u32
            })
            .collect();
        let labels: Vec<u32> = roots.iter().map(|&r| smallest[r as usize]).collect();
        let mut sizes = vec![0u32; n];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        let reps: Vec<u32> = (0..n as u32).filter(|&v| labels[v as usize] == v).collect();
        let sizes = reps.iter().map(|&r| sizes[r as usize]).collect();
        Components {
            labels,
            reps,
            sizes,
        }
    }
}

/// A component labeling. Labels are the smallest vertex id in the component,
/// and components are listed in increasing label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    labels: Vec<u32>,
    reps: Vec<u32>,
    sizes: Vec<u32>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.reps.len()
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Representatives (smallest member) of each component.
    pub fn representatives(&self) -> &[u32] {
        &self.reps
    }

    /// Component sizes, aligned with [`Components::representatives`].
    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// The two largest component sizes (0 where absent).
    pub fn two_largest(&self) -> (usize, usize) {
        let (mut a, mut b) = (0, 0);
        for &s in &self.sizes {
            let s = s as usize;
            if s > a {
                b = a;
                a = s;
            } else if s > b {
                b = s;
            }
        }
        (a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_smallest_members() {
        let mut uf = UnionFind::new(6);
        uf.union(5, 3);
        uf.union(3, 1);
        uf.union(4, 2);
        assert!(!uf.union(1, 5));
        let c = uf.components();
        assert_eq!(c.labels(), &[0, 1, 2, 1, 2, 1]);
        assert_eq!(c.representatives(), &[0, 1, 2]);
        assert_eq!(c.sizes(), &[1, 3, 2]);
        assert_eq!(c.two_largest(), (3, 2));
    }
}
