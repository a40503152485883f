"""
Grouping keypoints into exercises
=================================

Two people at one station move at the same rate. Phase tells them apart:
keypoints on the same body move in step, keypoints on different people
usually do not.
"""
from repmotion import synth
from repmotion.cluster import build_adjacency, cluster_segments, connected_components, phase_difference
from repmotion.trajectory import ExerciseSegment

for offset in (90.0, 5.0):
    scene = synth.phase_split_scene(offset, seed=3)
    tracks = scene.trajectories
    print(f"\n{offset:g} degree offset, {len(tracks)} keypoint tracks")

    a, b = tracks[0], tracks[-1]
    print(f"  phase between {a.id} and {b.id}: {phase_difference(a, b):.1f} deg")

    adj = build_adjacency(tracks)
    print("  components:", connected_components(adj))

    # In the full pipeline the inputs are detected segments; here every
    # track is treated as one segment.
    segs = [ExerciseSegment(t.id, t.start_frame, t.end_frame, (0,), 1.0) for t in tracks]
    for c in cluster_segments(segs, {t.id: t for t in tracks}, scene.boxes):
        print(f"  cluster {c.id}: {len(c.member_segments)} members, frames {c.start_frame}-{c.end_frame}")
