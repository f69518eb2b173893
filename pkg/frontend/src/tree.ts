// Phase-tree model: a client-side mirror of the parent/child relation the
// service reports. The rendered tree must stay isomorphic to that relation,
// so the model is rebuilt purely from SessionView objects and never edited
// by UI code directly.

import { SessionView } from "./types.js";

export interface TreeNode {
  id: string;
  children: TreeNode[];
}

/**
 * Build the forest of phase trees from a set of session views. Sessions
 * whose parent is unknown (or absent from the set) become roots; children
 * are ordered as the parent reports them.
 */
export function buildForest(views: Iterable<SessionView>): TreeNode[] {
  const byId = new Map<string, SessionView>();
  for (const v of views) byId.set(v.id, v);
  const make = (id: string): TreeNode => {
    const view = byId.get(id);
    const childIds = view ? view.children.filter((c) => byId.has(c)) : [];
    return { id, children: childIds.map(make) };
  };
  return [...byId.values()]
    .filter((v) => v.parent === null || !byId.has(v.parent))
    .map((v) => make(v.id));
}

/** Depth-first node ids of a forest, parents before children. */
export function flatten(forest: TreeNode[]): string[] {
  const out: string[] = [];
  const walk = (n: TreeNode) => {
    out.push(n.id);
    n.children.forEach(walk);
  };
  forest.forEach(walk);
  return out;
}

/**
 * True when the forest is exactly the parent/child relation in `views`:
 * same node set, and every edge in the forest is reported by the service
 * and vice versa.
 */
export function isomorphic(forest: TreeNode[], views: Iterable<SessionView>): boolean {
  const byId = new Map<string, SessionView>();
  for (const v of views) byId.set(v.id, v);

  const treeEdges = new Set<string>();
  const seen = new Set<string>();
  const walk = (n: TreeNode): boolean => {
    if (seen.has(n.id)) return false; // duplicate node: not a forest
    seen.add(n.id);
    return n.children.every((c) => treeEdges.add(`${n.id}>${c.id}`) && walk(c));
  };
  if (!forest.every(walk)) return false;
  if (seen.size !== byId.size || [...seen].some((id) => !byId.has(id))) return false;

  const serviceEdges = new Set<string>();
  for (const v of byId.values()) {
    for (const c of v.children) {
      if (byId.has(c)) serviceEdges.add(`${v.id}>${c}`);
    }
  }
  return treeEdges.size === serviceEdges.size && [...treeEdges].every((e) => serviceEdges.has(e));
}
