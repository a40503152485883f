import pytest

from repmotion.errors import ValidationError
from repmotion.evaluation import evaluate, match_clusters, temporal_iou, window_truth


def win(start, label, length=150):
    return {"start_frame": start, "end_frame": start + length - 1, "label": label}


def cluster(cid, box, start, end, reps=None, label="circle"):
    return {"id": cid, "box_id": box, "start_frame": start, "end_frame": end,
            "reps": {"counted": reps is not None, "value": reps, "rounded": None if reps is None else round(reps)},
            "recognition": {"label": label}}


def report(trajectories=(), clusters=()):
    return {"trajectories": list(trajectories), "rejected": [], "clusters": list(clusters)}


def test_iou():
    assert temporal_iou(0, 9, 0, 9) == 1.0
    assert temporal_iou(0, 9, 10, 19) == 0.0
    assert temporal_iou(0, 9, 5, 14) == pytest.approx(5 / 15)


def test_window_truth_half_overlap():
    rec = {"class": "circle", "start_frame": 75, "end_frame": 1000}
    assert window_truth(win(0, 1), rec) == 1
    assert window_truth(win(0, 1), dict(rec, start_frame=76)) == 0
    assert window_truth(win(0, 1), {"class": "non_exercise"}) == 0


def test_perfect_predictions():
    traj = [{"id": "a", "windows": [win(0, 1), win(30, 1)]}, {"id": "b", "windows": [win(0, 0)]}]
    truth = [{"id": "a", "class": "circle", "start_frame": 0, "end_frame": 179},
             {"id": "b", "class": "non_exercise", "start_frame": 0, "end_frame": 149},
             {"region": "r1", "class": "circle", "start_frame": 0, "end_frame": 179, "reps": 6}]
    m = evaluate(report(traj, [cluster("r1/0", "r1", 0, 179, 6.0)]), truth)
    assert m["detection_accuracy"] == 1.0 and m["false_positive_rate"] == 0.0 and m["precision"] == 1.0
    assert m["tracking_rate"] == 1.0 and m["cluster_false_positive_rate"] == 0.0
    assert m["rep_mae"] == 0.0 and m["recognition_accuracy"] == 1.0


def test_no_clusters_zero_tracking():
    truth = [{"region": "r", "class": "circle", "start_frame": 0, "end_frame": 99},
             {"region": "r", "class": "circle", "start_frame": 200, "end_frame": 299}]
    m = evaluate(report(), truth)
    assert m["tracking_rate"] == 0 and m["rep_mae"] is None and m["detection_accuracy"] is None


def test_hand_built_case():
    truth = [{"region": "r", "class": "circle", "start_frame": 0, "end_frame": 99, "reps": 10},
             {"region": "r", "class": "circle", "start_frame": 500, "end_frame": 599, "reps": 10}]
    # IoU with the first exercise: 75 / 125 = 0.6
    clusters = [cluster("r/0", "r", 25, 124, 12.0), cluster("r/1", "r", 1000, 1100, 3.0)]
    m = evaluate(report(clusters=clusters), truth)
    assert m["tracking_rate"] == 0.5 and m["cluster_false_positive_rate"] == 0.5
    assert m["rep_mae"] == 2.0


def test_matching_is_greedy_one_to_one_and_region_bound():
    ex = [{"region": "r", "start_frame": 0, "end_frame": 99}, {"region": "r", "start_frame": 10, "end_frame": 109}]
    cl = [{"box_id": "r", "start_frame": 10, "end_frame": 109}, {"box_id": "q", "start_frame": 0, "end_frame": 99}]
    assert match_clusters(cl, ex) == [(0, 1, 1.0)]


def test_unknown_ids_listed():
    with pytest.raises(ValidationError, match="ghost"):
        evaluate(report([{"id": "a", "windows": []}]),
                 [{"id": "a", "class": "circle"}, {"id": "ghost", "class": "circle"}])
    with pytest.raises(ValidationError, match="orphan"):
        evaluate(report([{"id": "a", "windows": []}, {"id": "orphan", "windows": []}]),
                 [{"id": "a", "class": "circle"}])
