//! Domain model of the generated object base: classes, objects, references.

use serde::{Deserialize, Serialize};

use crate::params::DatabaseParams;

/// Logical object identifier. OIDs are allocated sequentially and never
/// reused; deletions leave holes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Oid(pub u64);

impl Oid {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for Oid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "o{}", self.0)
    }
}

/// Logical class identifier, same allocation discipline as [`Oid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassId(pub u64);

impl ClassId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for ClassId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Reference type tag (inheritance, aggregation, user association, ...).
/// Types 0 and 1 are flagged acyclic by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RefType(pub u32);

/// Reference type conventionally used for inheritance; drives instance-size
/// computation.
pub const INHERITANCE_TYPE: RefType = RefType(0);

/// One typed reference slot of a class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRef {
    /// Referenced class, or NIL.
    pub target: Option<ClassId>,
    /// Type of the reference.
    pub tref: RefType,
}

/// One generated class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDescriptor {
    pub class_id: ClassId,
    /// Ordered reference slots; instances mirror this layout in `orefs`.
    pub crefs: Vec<ClassRef>,
    /// Per-class size increment in bytes.
    pub basesize: u64,
    /// Bytes one instance occupies: `basesize` plus the basesizes of all
    /// distinct inheritance ancestors.
    pub instance_size: u64,
    /// OIDs of all live instances, ascending.
    pub iterator: Vec<Oid>,
}

impl ClassDescriptor {
    /// Removes `oid` from the instance iterator.
    pub(crate) fn iterator_remove(&mut self, oid: Oid) {
        if let Ok(pos) = self.iterator.binary_search(&oid) {
            self.iterator.remove(pos);
        }
    }
}

/// One object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub oid: Oid,
    pub class_id: ClassId,
    /// Integer attributes read and updated by transactions.
    pub attributes: Vec<i64>,
    /// Bytes this object occupies in the store (the owning class's
    /// instance size at creation time).
    pub filler_size: u64,
    /// Forward references, aligned to the owning class's `crefs` slots.
    pub orefs: Vec<Option<Oid>>,
    /// Reverse references: one entry per forward edge pointing here
    /// (a multiset; a source appears once per referencing slot).
    pub backrefs: Vec<Oid>,
}

/// The generated object base: schema plus object graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectBase {
    pub params: DatabaseParams,
    /// Seed the base was generated from (recorded in snapshots and reports).
    pub seed: u64,
    classes: Vec<Option<ClassDescriptor>>,
    objects: Vec<Option<ObjectInstance>>,
    /// Live class ids, ascending.
    live_classes: Vec<ClassId>,
    /// Live OIDs, ascending.
    live_oids: Vec<Oid>,
    pub next_class_id: u64,
    pub next_oid: u64,
}

impl ObjectBase {
    pub(crate) fn new(params: DatabaseParams, seed: u64) -> Self {
        ObjectBase {
            params,
            seed,
            classes: Vec::new(),
            objects: Vec::new(),
            live_classes: Vec::new(),
            live_oids: Vec::new(),
            next_class_id: 0,
            next_oid: 0,
        }
    }

    pub fn class(&self, id: ClassId) -> Option<&ClassDescriptor> {
        self.classes.get(id.index()).and_then(Option::as_ref)
    }

    pub fn class_mut(&mut self, id: ClassId) -> Option<&mut ClassDescriptor> {
        self.classes.get_mut(id.index()).and_then(Option::as_mut)
    }

    pub fn object(&self, oid: Oid) -> Option<&ObjectInstance> {
        self.objects.get(oid.index()).and_then(Option::as_ref)
    }

    pub fn object_mut(&mut self, oid: Oid) -> Option<&mut ObjectInstance> {
        self.objects.get_mut(oid.index()).and_then(Option::as_mut)
    }

    /// Live class ids in ascending order.
    pub fn live_classes(&self) -> &[ClassId] {
        &self.live_classes
    }

    /// Live OIDs in ascending order.
    pub fn live_oids(&self) -> &[Oid] {
        &self.live_oids
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDescriptor> {
        self.classes.iter().filter_map(Option::as_ref)
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectInstance> {
        self.objects.iter().filter_map(Option::as_ref)
    }

    pub fn class_count(&self) -> usize {
        self.live_classes.len()
    }

    pub fn object_count(&self) -> usize {
        self.live_oids.len()
    }

    /// Sum of `filler_size` over live objects: the logical size of the base.
    pub fn total_instance_bytes(&self) -> u64 {
        self.objects().map(|o| o.filler_size).sum()
    }

    /// Registers a freshly built class under the next class id.
    pub(crate) fn push_class(&mut self, class: ClassDescriptor) -> ClassId {
        let id = class.class_id;
        debug_assert_eq!(id.0, self.next_class_id);
        self.classes.push(Some(class));
        self.live_classes.push(id);
        self.next_class_id += 1;
        id
    }

    /// Registers a freshly built object under the next OID.
    pub(crate) fn push_object(&mut self, object: ObjectInstance) -> Oid {
        let oid = object.oid;
        debug_assert_eq!(oid.0, self.next_oid);
        let class = object.class_id;
        self.objects.push(Some(object));
        self.live_oids.push(oid);
        self.next_oid += 1;
        if let Some(c) = self.class_mut(class) {
            c.iterator.push(oid);
        }
        oid
    }

    pub(crate) fn take_object(&mut self, oid: Oid) -> Option<ObjectInstance> {
        let slot = self.objects.get_mut(oid.index())?;
        let obj = slot.take()?;
        if let Ok(pos) = self.live_oids.binary_search(&oid) {
            self.live_oids.remove(pos);
        }
        Some(obj)
    }

    pub(crate) fn take_class(&mut self, id: ClassId) -> Option<ClassDescriptor> {
        let slot = self.classes.get_mut(id.index())?;
        let class = slot.take()?;
        if let Ok(pos) = self.live_classes.binary_search(&id) {
            self.live_classes.remove(pos);
        }
        Some(class)
    }

    /// Live OIDs of `class` within the inclusive window `[lo, hi]`, as a
    /// subslice of the class iterator.
    pub fn iterator_window(&self, class: ClassId, lo: Oid, hi: Oid) -> &[Oid] {
        let Some(c) = self.class(class) else {
            return &[];
        };
        let start = c.iterator.partition_point(|&o| o < lo);
        let end = c.iterator.partition_point(|&o| o <= hi);
        &c.iterator[start..end]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DatabaseParams;

    fn empty_base() -> ObjectBase {
        ObjectBase::new(DatabaseParams::default(), 1)
    }

    #[test]
    fn push_and_lookup() {
        let mut base = empty_base();
        let cid = base.push_class(ClassDescriptor {
            class_id: ClassId(0),
            crefs: vec![],
            basesize: 50,
            instance_size: 50,
            iterator: vec![],
        });
        let oid = base.push_object(ObjectInstance {
            oid: Oid(0),
            class_id: cid,
            attributes: vec![0],
            filler_size: 50,
            orefs: vec![],
            backrefs: vec![],
        });
        assert_eq!(base.class(cid).unwrap().iterator, vec![oid]);
        assert_eq!(base.object(oid).unwrap().class_id, cid);
        assert_eq!(base.object_count(), 1);
        assert_eq!(base.total_instance_bytes(), 50);
    }

    #[test]
    fn take_object_leaves_hole() {
        let mut base = empty_base();
        base.push_class(ClassDescriptor {
            class_id: ClassId(0),
            crefs: vec![],
            basesize: 10,
            instance_size: 10,
            iterator: vec![],
        });
        for i in 0..3 {
            base.push_object(ObjectInstance {
                oid: Oid(i),
                class_id: ClassId(0),
                attributes: vec![],
                filler_size: 10,
                orefs: vec![],
                backrefs: vec![],
            });
        }
        base.take_object(Oid(1));
        assert!(base.object(Oid(1)).is_none());
        assert_eq!(base.live_oids(), &[Oid(0), Oid(2)]);
        assert_eq!(base.next_oid, 3);
    }

    #[test]
    fn iterator_window_bounds() {
        let mut base = empty_base();
        base.push_class(ClassDescriptor {
            class_id: ClassId(0),
            crefs: vec![],
            basesize: 10,
            instance_size: 10,
            iterator: vec![],
        });
        for i in 0..10 {
            base.push_object(ObjectInstance {
                oid: Oid(i),
                class_id: ClassId(0),
                attributes: vec![],
                filler_size: 10,
                orefs: vec![],
                backrefs: vec![],
            });
        }
        assert_eq!(base.iterator_window(ClassId(0), Oid(3), Oid(5)), &[Oid(3), Oid(4), Oid(5)]);
        assert_eq!(base.iterator_window(ClassId(0), Oid(9), Oid(20)).len(), 1);
        assert!(base.iterator_window(ClassId(1), Oid(0), Oid(9)).is_empty());
    }
}
