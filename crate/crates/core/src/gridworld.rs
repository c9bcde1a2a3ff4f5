//! Rooms-with-corridor gridworld.
//!
//! Cells are addressed `(row, col)` with row 0 at the top; `Up` decrements
//! the row. A move into a wall or off the grid is not executed and the agent
//! stays where it is (the step cost is still charged).
//!
//! Map documents are 13 lines of 13 characters: `#` wall, `.` free,
//! `S` start, `G` goal.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Side length of map documents.
pub const GRID_SIZE: usize = 13;

/// The shipped four-rooms map.
pub const DEFAULT_MAP: &str = include_str!("../data/rooms.map");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    fn offset(self) -> (isize, isize) {
        match self {
            Action::Up => (-1, 0),
            Action::Down => (1, 0),
            Action::Left => (0, -1),
            Action::Right => (0, 1),
        }
    }
}

/// Rewards charged by [`GridMap::step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardScheme {
    pub step_reward: f64,
    pub goal_reward: f64,
}

impl Default for RewardScheme {
    fn default() -> Self {
        Self {
            step_reward: -1.0,
            goal_reward: 100.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub next: Cell,
    pub reward: f64,
    pub done: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    start: Cell,
    goal: Cell,
}

impl GridMap {
    /// Builds a map from a row-major `blocked` mask. Start and goal must be
    /// free, and the goal reachable from the start.
    pub fn new(width: usize, height: usize, blocked: Vec<bool>, start: Cell, goal: Cell) -> Result<Self> {
        if width == 0 || height == 0 || blocked.len() != width * height {
            return Err(Error::Model(alloc::format!(
                "blocked mask of length {} does not match {width}x{height}",
                blocked.len()
            )));
        }
        let map = Self {
            width,
            height,
            blocked,
            start,
            goal,
        };
        for (name, cell) in [("start", start), ("goal", goal)] {
            if !map.is_free(cell) {
                return Err(Error::Model(alloc::format!("{name} {cell} is not a free cell")));
            }
        }
        if map.bfs_distance(start, goal).is_none() {
            return Err(Error::Model(alloc::format!(
                "goal {goal} is unreachable from start {start}"
            )));
        }
        Ok(map)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && !self.blocked[cell.row * self.width + cell.col]
    }

    /// Destination of `action` from `cell`, ignoring walls.
    fn target(&self, cell: Cell, action: Action) -> Option<Cell> {
        let (dr, dc) = action.offset();
        let row = cell.row.checked_add_signed(dr)?;
        let col = cell.col.checked_add_signed(dc)?;
        let next = Cell::new(row, col);
        self.in_bounds(next).then_some(next)
    }

    /// Cell reached by `action`; blocked or off-grid moves leave `cell` unchanged.
    pub fn move_from(&self, cell: Cell, action: Action) -> Cell {
        match self.target(cell, action) {
            Some(next) if self.is_free(next) => next,
            _ => cell,
        }
    }

    pub fn step(&self, state: Cell, action: Action, rewards: &RewardScheme) -> Result<Transition> {
        if !self.is_free(state) {
            return Err(Error::InvalidArgument(alloc::format!("{state} is not a free cell")));
        }
        if state == self.goal {
            return Err(Error::Usage("cannot step from the goal cell".into()));
        }
        let next = self.move_from(state, action);
        let done = next == self.goal;
        let reward = if done {
            rewards.step_reward + rewards.goal_reward
        } else {
            rewards.step_reward
        };
        Ok(Transition { next, reward, done })
    }

    fn bfs_distance(&self, from: Cell, to: Cell) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.width * self.height];
        let mut queue = VecDeque::new();
        dist[from.row * self.width + from.col] = 0;
        queue.push_back(from);
        while let Some(cell) = queue.pop_front() {
            let d = dist[cell.row * self.width + cell.col];
            if cell == to {
                return Some(d);
            }
            for action in Action::ALL {
                let next = self.move_from(cell, action);
                let slot = &mut dist[next.row * self.width + next.col];
                if *slot == usize::MAX {
                    *slot = d + 1;
                    queue.push_back(next);
                }
            }
        }
        None
    }

    /// Fewest moves from start to goal.
    pub fn shortest_path_bfs(&self) -> usize {
        self.bfs_distance(self.start, self.goal)
            .expect("goal reachability is checked on construction")
    }

    /// Free cells in row-major order.
    pub fn enumerate_states(&self) -> Vec<Cell> {
        (0..self.height)
            .flat_map(|row| (0..self.width).map(move |col| Cell::new(row, col)))
            .filter(|&c| self.is_free(c))
            .collect()
    }

    /// Renders the map back into document form.
    pub fn render(&self) -> alloc::string::String {
        let mut out = alloc::string::String::with_capacity((self.width + 1) * self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                let cell = Cell::new(row, col);
                out.push(if cell == self.start {
                    'S'
                } else if cell == self.goal {
                    'G'
                } else if self.is_free(cell) {
                    '.'
                } else {
                    '#'
                });
            }
            out.push('\n');
        }
        out
    }
}

/// Parses a 13x13 map document.
pub fn parse_map(text: &str) -> Result<GridMap> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let lines: Vec<&str> = body.split('\n').collect();
    if lines.len() != GRID_SIZE {
        return Err(Error::Parse {
            line: lines.len().min(GRID_SIZE + 1),
            message: alloc::format!("expected {GRID_SIZE} lines, found {}", lines.len()),
        });
    }
    let mut blocked = Vec::with_capacity(GRID_SIZE * GRID_SIZE);
    let mut start = None;
    let mut goal = None;
    for (row, line) in lines.iter().enumerate() {
        let parse_err = |message| Error::Parse { line: row + 1, message };
        if line.chars().count() != GRID_SIZE {
            return Err(parse_err(alloc::format!(
                "expected {GRID_SIZE} characters, found {}",
                line.chars().count()
            )));
        }
        for (col, ch) in line.chars().enumerate() {
            let cell = Cell::new(row, col);
            match ch {
                '#' => blocked.push(true),
                '.' => blocked.push(false),
                'S' | 'G' => {
                    let slot = if ch == 'S' { &mut start } else { &mut goal };
                    if slot.replace(cell).is_some() {
                        return Err(parse_err(alloc::format!("duplicate '{ch}' marker at column {col}")));
                    }
                    blocked.push(false);
                }
                other => {
                    return Err(parse_err(alloc::format!(
                        "unexpected character {other:?} at column {col}"
                    )))
                }
            }
        }
    }
    let missing = |what: &str| Error::Parse {
        line: GRID_SIZE,
        message: alloc::format!("map has no '{what}' marker"),
    };
    let start = start.ok_or_else(|| missing("S"))?;
    let goal = goal.ok_or_else(|| missing("G"))?;
    GridMap::new(GRID_SIZE, GRID_SIZE, blocked, start, goal)
}

impl FromStr for GridMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_map(s)
    }
}

/// Dense indexing of a map's free cells, in [`GridMap::enumerate_states`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateIndex {
    cells: Vec<Cell>,
    lookup: Vec<Option<usize>>,
    width: usize,
}

impl StateIndex {
    pub fn new(map: &GridMap) -> Self {
        let cells = map.enumerate_states();
        let mut lookup = vec![None; map.width * map.height];
        for (i, c) in cells.iter().enumerate() {
            lookup[c.row * map.width + c.col] = Some(i);
        }
        Self {
            cells,
            lookup,
            width: map.width,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index_of(&self, cell: Cell) -> Option<usize> {
        if cell.col >= self.width {
            return None;
        }
        self.lookup.get(cell.row * self.width + cell.col).copied().flatten()
    }

    pub fn cell(&self, index: usize) -> Cell {
        self.cells[index]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }
}
