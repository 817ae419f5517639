//! Dinic's algorithm on an arc-pair list. Both the BFS and the blocking-flow search are
//! iterative, so long carry chains cannot overflow the call stack.

use std::collections::VecDeque;

const NIL: u32 = u32::MAX;
pub const INF: i64 = i64::MAX / 4;

#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    head: Vec<u32>,
    next: Vec<u32>,
    to: Vec<u32>,
    cap: Vec<i64>,
    orig: Vec<i64>,
}

impl FlowNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.head.len()
    }

    /// Number of forward arcs.
    pub fn arc_count(&self) -> usize {
        self.to.len() / 2
    }

    pub fn add_node(&mut self) -> u32 {
        self.head.push(NIL);
        (self.head.len() - 1) as u32
    }

    /// Add `from -> to` with capacity `cap`; returns the forward arc id.
    pub fn add_arc(&mut self, from: u32, to: u32, cap: i64) -> u32 {
        let id = self.to.len() as u32;
        for (a, b, c) in [(from, to, cap), (to, from, 0)] {
            self.to.push(b);
            self.cap.push(c);
            self.orig.push(c);
            self.next.push(self.head[a as usize]);
            self.head[a as usize] = self.to.len() as u32 - 1;
        }
        id
    }

    /// Change the capacity of an arc that has not carried flow yet.
    pub fn set_capacity(&mut self, arc: u32, cap: i64) {
        let a = arc as usize;
        debug_assert_eq!(self.cap[a], self.orig[a]);
        self.cap[a] = cap;
        self.orig[a] = cap;
    }

    pub fn capacity(&self, arc: u32) -> i64 {
        self.orig[arc as usize]
    }

    /// Flow currently routed on a forward arc.
    pub fn flow(&self, arc: u32) -> i64 {
        self.orig[arc as usize] - self.cap[arc as usize]
    }

    fn levels(&self, s: u32, t: u32, level: &mut [i32]) -> bool {
        level.fill(-1);
        level[s as usize] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            let mut a = self.head[v as usize];
            while a != NIL {
                let w = self.to[a as usize];
                if self.cap[a as usize] > 0 && level[w as usize] < 0 {
                    level[w as usize] = level[v as usize] + 1;
                    q.push_back(w);
                }
                a = self.next[a as usize];
            }
        }
        level[t as usize] >= 0
    }

    pub fn max_flow(&mut self, s: u32, t: u32) -> i64 {
        let n = self.head.len();
        let mut level = vec![-1i32; n];
        let mut it = vec![NIL; n];
        let mut path: Vec<u32> = Vec::new();
        let mut total = 0i64;
        while self.levels(s, t, &mut level) {
            it.copy_from_slice(&self.head);
            path.clear();
            let mut v = s;
            loop {
                if v == t {
                    let f = path.iter().map(|&a| self.cap[a as usize]).min().unwrap_or(0);
                    for &a in &path {
                        self.cap[a as usize] -= f;
                        self.cap[(a ^ 1) as usize] += f;
                    }
                    total += f;
                    let k = path
                        .iter()
                        .position(|&a| self.cap[a as usize] == 0)
                        .unwrap_or(0);
                    path.truncate(k);
                    v = path.last().map_or(s, |&a| self.to[a as usize]);
                    continue;
                }
                let mut advanced = false;
                while it[v as usize] != NIL {
                    let a = it[v as usize];
                    let w = self.to[a as usize];
                    if self.cap[a as usize] > 0 && level[w as usize] == level[v as usize] + 1 {
                        path.push(a);
                        v = w;
                        advanced = true;
                        break;
                    }
                    it[v as usize] = self.next[a as usize];
                }
                if !advanced {
                    if v == s {
                        break;
                    }
                    // Dead end: prune `v` and skip the arc that led here.
                    level[v as usize] = -1;
                    let a = path.pop().expect("non-empty path below the source");
                    v = self.to[(a ^ 1) as usize];
                    it[v as usize] = self.next[it[v as usize] as usize];
                }
            }
        }
        total
    }
}
