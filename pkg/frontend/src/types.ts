/** Snapshot file schemas, mirroring the pipeline's External Interfaces. */

export type CountItem = { item: string; count: number };

export type MetaDoc = {
  generated_at: string;
  window_days: number;
  total_posts: number;
  unique_users: number;
  top_hashtags: CountItem[];
  top_emojis: CountItem[];
  languages: Record<string, number>;
};

export type DayRow = { date: string; posts: number; users: number };
export type ActivityDoc = { days: DayRow[] };

export type CountsRow = { date: string; counts: Record<string, number> };
export type CountsDoc = { days: CountsRow[] };

export type TopicRow = {
  topic_id: number;
  count: number;
  keywords: string[];
  sentiment_counts: Record<string, number>;
  emotion_counts: Record<string, number>;
};
export type TopicsDoc = { topics: TopicRow[] };

export type GraphEdge = { a: string; b: string; weight: number };
export type GraphDoc = { nodes: Record<string, number>; edges: GraphEdge[] };

export type ManifestDoc = { files: Record<string, string> };

export type LoadError = { file: string; reason: string };

export type SnapshotBundle = {
  meta?: MetaDoc;
  activity?: ActivityDoc;
  sentiment?: CountsDoc;
  emotion?: CountsDoc;
  topics?: TopicsDoc;
  hashtags?: GraphDoc;
  emojis?: GraphDoc;
  manifest?: ManifestDoc;
  errors: LoadError[];
};
